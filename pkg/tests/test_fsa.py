"""Tests for automata, transformations and state sequences."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from lens.automata.fsa import (
    AutomatonError,
    Fsa,
    SymbolKind,
    Transformation,
    classify_symbol,
    compose,
    cyclic_counter,
    direct_product,
    extend_alphabet,
    flip_flop,
    reset_automaton,
    run,
    state_sequence,
    transformation_of,
)
from lens.automata.catalog import mixed_target


def test_reset_automaton_example():
    assert state_sequence(reset_automaton(), "A", "0110") == ["A", "B", "B", "A"]


def test_run_returns_last_state():
    assert run(reset_automaton(), "A", "0110") == "A"
    assert run(reset_automaton(), "B", "") == "B"


def test_state_sequence_of_empty_word():
    assert state_sequence(reset_automaton(), "A", []) == []


def test_unknown_symbol_is_named():
    with pytest.raises(AutomatonError, match="'2'"):
        run(reset_automaton(), "A", "012")


def test_unknown_state_is_named():
    with pytest.raises(AutomatonError, match="'C'"):
        state_sequence(reset_automaton(), "C", "0")


@pytest.mark.parametrize("length", range(7))
def test_prefix_property_exhaustive(length):
    a = reset_automaton()
    for q0 in a.states:
        for word in itertools.product(a.alphabet, repeat=length):
            full = state_sequence(a, q0, word)
            for n in range(length + 1):
                assert state_sequence(a, q0, word[:n]) == full[:n]


def test_incomplete_table_rejected():
    with pytest.raises(AutomatonError, match="missing"):
        Fsa.from_delta(("0",), ("A", "B"), {("0", "A"): "A"})


def test_duplicate_states_rejected():
    with pytest.raises(AutomatonError):
        Fsa(("0",), ("A", "A"), ((0, 1),))


def test_transformation_composition_order():
    swap = Transformation((1, 0, 2))
    collapse = Transformation((0, 0, 0))
    assert compose(swap, collapse) == Transformation((0, 0, 0))
    assert compose(collapse, swap) == Transformation((1, 1, 1))


def test_transformation_inverse():
    t = Transformation((2, 0, 1))
    assert t.then(t.inverse()).is_identity
    with pytest.raises(AutomatonError):
        Transformation((0, 0)).inverse()


def test_classify_symbols_of_flip_flop():
    a = flip_flop()
    assert classify_symbol(a, "0").kind is SymbolKind.RESET
    assert classify_symbol(a, "1").kind is SymbolKind.RESET
    identity = classify_symbol(a, "e")
    assert identity.kind is SymbolKind.PERMUTATION
    assert identity.is_identity and identity.is_reset and identity.is_permutation


def test_classify_counter_and_mixed_symbols():
    assert classify_symbol(cyclic_counter(3), "+1").kind is SymbolKind.PERMUTATION
    mixed = classify_symbol(mixed_target(), "p")
    assert mixed.kind is SymbolKind.MIXED
    assert not mixed.is_reset and not mixed.is_permutation


@st.composite
def random_automaton(draw, max_states: int = 5, max_symbols: int = 3) -> Fsa:
    n_states = draw(st.integers(min_value=1, max_value=max_states))
    n_symbols = draw(st.integers(min_value=1, max_value=max_symbols))
    table = draw(st.lists(
        st.lists(st.integers(min_value=0, max_value=n_states - 1), min_size=n_states, max_size=n_states),
        min_size=n_symbols,
        max_size=n_symbols,
    ))
    return Fsa(tuple(f"s{i}" for i in range(n_symbols)), tuple(f"q{i}" for i in range(n_states)), table)


@settings(max_examples=500, deadline=None)
@given(random_automaton())
def test_classify_symbol_matches_definitions(a):
    for symbol in a.alphabet:
        image = [a.delta(symbol, q) for q in a.states]
        identity = image == list(a.states)
        constant = len(set(image)) == 1
        bijective = len(set(image)) == len(a.states)

        cls = classify_symbol(a, symbol)
        assert cls.is_identity == identity
        assert cls.is_reset == (constant or identity)
        assert cls.is_permutation == bijective
        if bijective:
            assert cls.kind is SymbolKind.PERMUTATION
        elif constant:
            assert cls.kind is SymbolKind.RESET
        else:
            assert cls.kind is SymbolKind.MIXED


def test_classify_unknown_symbol_rejected():
    with pytest.raises(AutomatonError):
        classify_symbol(reset_automaton(), "x")


def test_transformation_of_empty_word_is_identity():
    assert transformation_of(cyclic_counter(4), []).is_identity


def test_counter_word_transformation():
    assert transformation_of(cyclic_counter(3), ["+1"] * 4) == Transformation((1, 2, 0))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.sampled_from(["p", "q", "e"]), max_size=10),
    st.lists(st.sampled_from(["p", "q", "e"]), max_size=10),
)
def test_transformation_of_is_a_homomorphism(u, v):
    a = mixed_target()
    assert transformation_of(a, u + v) == transformation_of(a, u).then(transformation_of(a, v))


def test_extend_alphabet_adds_identity_rows():
    a = extend_alphabet(reset_automaton(), ("e", "0"))
    assert a.alphabet == ("0", "1", "e")
    assert a.transformation("e").is_identity


def test_direct_product_runs_componentwise():
    product = direct_product(reset_automaton(), cyclic_counter(2))
    assert product.alphabet == ("0", "1", "+1")
    assert len(product.states) == 4
    assert state_sequence(product, ("A", "0"), ["1", "+1", "0"]) == [
        ("B", "0"),
        ("B", "1"),
        ("A", "1"),
    ]


def test_cyclic_counter_rejects_zero():
    with pytest.raises(AutomatonError):
        cyclic_counter(0)
