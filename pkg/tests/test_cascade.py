"""Tests for cascades and covering maps."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from lens.automata.cascade import (
    Cascade,
    CascadeComponent,
    CascadeError,
    CoveringError,
    CoveringMap,
    cascade_state_sequence,
    cascade_step,
    check_covering,
    component_kind,
    compose_maps,
    flatten,
    projection_map,
)
from lens.automata.catalog import flip_flop_swap, mixed_cascade, mixed_cover, mixed_target
from lens.automata.fsa import (
    Fsa,
    SymbolKind,
    cyclic_counter,
    direct_product,
    extend_alphabet,
    flip_flop,
    reset_automaton,
    run,
    state_sequence,
)


def delay_line() -> Cascade:
    """Component 1 copies the state component 0 held one step earlier."""
    follow = {(symbol, (), own): {"0": "A", "1": "B"}[symbol] for symbol in "01" for own in "AB"}
    copy = {(symbol, (upstream,), own): upstream for symbol in "01" for upstream in "AB" for own in "AB"}
    return Cascade(
        ("0", "1"),
        (CascadeComponent("input", ("A", "B"), follow), CascadeComponent("delay", ("A", "B"), copy)),
    )


def single_component(a: Fsa) -> Cascade:
    table = {(symbol, (), q): a.delta(symbol, q) for symbol in a.alphabet for q in a.states}
    return Cascade(a.alphabet, (CascadeComponent("only", a.states, table),))


@st.composite
def cascade_and_word(draw, max_components: int = 3, max_states: int = 3, max_length: int = 32):
    alphabet = tuple("pqr"[:draw(st.integers(min_value=1, max_value=3))])
    components = []
    for k in range(draw(st.integers(min_value=1, max_value=max_components))):
        states = tuple(f"{k}.{i}" for i in range(draw(st.integers(min_value=1, max_value=max_states))))
        table = {}
        for symbol in alphabet:
            for upstream in itertools.product(*(c.states for c in components)):
                for own in states:
                    table[(symbol, upstream, own)] = draw(st.sampled_from(states))
        components.append(CascadeComponent(f"c{k}", states, table))
    c = Cascade(alphabet, tuple(components))
    q0 = tuple(draw(st.sampled_from(component.states)) for component in c.components)
    word = draw(st.lists(st.sampled_from(alphabet), max_size=max_length))
    return c, q0, word


def test_cascade_step_reads_upstream_pre_step_state():
    c = mixed_cascade()
    # upstream is b before the step, so p does not swap the parity bit
    assert cascade_step(c, ("b", "0"), "p") == ("a", "0")
    assert cascade_step(c, ("a", "0"), "p") == ("a", "1")


def test_cascade_state_sequence():
    assert cascade_state_sequence(mixed_cascade(), ("a", "0"), ["p", "q"]) == [("a", "1"), ("b", "1")]


def test_invalid_joint_state_rejected():
    c = mixed_cascade()
    with pytest.raises(CascadeError):
        cascade_step(c, ("a",), "p")
    with pytest.raises(CascadeError, match="'c'"):
        cascade_step(c, ("c", "0"), "p")


def test_incomplete_component_rejected():
    with pytest.raises(CascadeError, match=r"\('q', \(\), 'a'\)"):
        Cascade(("p", "q"), (CascadeComponent("r", ("a",), {("p", (), "a"): "a"}),))


def test_delay_line_step_reads_old_upstream():
    c = delay_line()
    assert cascade_step(c, ("A", "A"), "1") == ("B", "A")
    assert cascade_step(c, ("B", "A"), "0") == ("A", "B")


def test_delay_line_shifts_input_by_one():
    visited = cascade_state_sequence(delay_line(), ("A", "A"), list("0110"))
    assert visited == [("A", "A"), ("B", "A"), ("B", "B"), ("A", "B")]
    assert [q[1] for q in visited[1:]] == [q[0] for q in visited[:-1]]


@pytest.mark.parametrize("a", [flip_flop(), cyclic_counter(3), mixed_target()], ids=["flip_flop", "counter3", "mixed3"])
def test_single_component_cascade_matches_its_automaton(a):
    c = single_component(a)
    for q, symbol in itertools.product(a.states, a.alphabet):
        assert cascade_step(c, (q,), symbol) == (a.delta(symbol, q),)
    flat = flatten(c)
    assert flat.states == tuple((q,) for q in a.states)
    assert flat.table == a.table


def test_empty_cascade_is_a_no_op():
    c = Cascade(("0", "1"), ())
    assert len(c) == 0
    assert cascade_step(c, (), "1") == ()
    assert cascade_state_sequence(c, (), ["0", "1"]) == [(), ()]
    assert flatten(c).states == ((),)


def test_independent_components_flatten_to_direct_product():
    product = direct_product(reset_automaton(), cyclic_counter(2))
    x = extend_alphabet(reset_automaton(), product.alphabet)
    y = extend_alphabet(cyclic_counter(2), product.alphabet)
    c = Cascade(
        product.alphabet,
        (
            CascadeComponent("x", x.states, {(s, (), q): x.delta(s, q) for s in x.alphabet for q in x.states}),
            CascadeComponent(
                "y",
                y.states,
                {(s, (u,), q): y.delta(s, q) for s in y.alphabet for u in x.states for q in y.states},
            ),
        ),
    )
    assert flatten(c) == product


@settings(max_examples=200, deadline=None)
@given(cascade_and_word())
def test_flatten_agrees_with_cascade_on_random_words(case):
    c, q0, word = case
    flat = flatten(c)
    assert state_sequence(flat, q0, word) == cascade_state_sequence(c, q0, word)
    assert run(flat, q0, word) == (cascade_state_sequence(c, q0, word) or [q0])[-1]


def test_flatten_agrees_with_cascade():
    c = mixed_cascade()
    flat = flatten(c)
    assert len(flat.states) == 4
    word = list("pqeqppeq")
    assert state_sequence(flat, ("a", "0"), word) == cascade_state_sequence(c, ("a", "0"), word)


def test_component_kinds_of_mixed_cascade():
    c = mixed_cascade()
    assert component_kind(c, 0) is SymbolKind.RESET
    assert component_kind(c, 1) is SymbolKind.PERMUTATION
    with pytest.raises(CascadeError):
        component_kind(c, 2)


def test_identity_covering():
    a = flip_flop()
    assert check_covering(a, a, CoveringMap.identity(a))


def test_projection_from_product_covers_factor():
    product = direct_product(reset_automaton(), cyclic_counter(2))
    x = extend_alphabet(reset_automaton(), product.alphabet)
    assert check_covering(product, x, projection_map(product, 0))
    counter = extend_alphabet(cyclic_counter(2), product.alphabet)
    assert check_covering(product, counter, projection_map(product, 1))


def test_composed_projections_cover_inner_factor():
    inner = direct_product(reset_automaton(), cyclic_counter(2))
    outer = direct_product(inner, cyclic_counter(3))
    counter = extend_alphabet(cyclic_counter(2), outer.alphabet)
    phi = compose_maps(projection_map(outer, 0), projection_map(inner, 1))
    assert len(phi.mapping) == len(outer.states) == 12
    assert all(phi(q) == q[0][1] for q in outer.states)
    assert check_covering(outer, counter, phi)
    assert not compose_maps(projection_map(inner, 1), projection_map(outer, 0)).mapping


def test_composed_coverings_cover():
    # mixed3 merged onto {X0} and {X1, X2}; p and q swap the blocks
    quotient = Fsa(mixed_target().alphabet, ("Z0", "Z1"), ((1, 0), (1, 0), (0, 1)))
    merge = CoveringMap({"X0": "Z0", "X1": "Z1", "X2": "Z1"})
    assert check_covering(mixed_target(), quotient, merge)

    phi = compose_maps(mixed_cover(), merge)
    assert dict(phi.mapping) == {("a", "0"): "Z0", ("a", "1"): "Z1", ("b", "0"): "Z1", ("b", "1"): "Z0"}
    assert check_covering(flatten(mixed_cascade()), quotient, phi)


def test_mixed_cascade_covers_mixed_target():
    result = check_covering(flatten(mixed_cascade()), mixed_target(), mixed_cover())
    assert result.covers
    assert result.counterexample is None


def test_state_swap_is_not_a_covering():
    a = flip_flop()
    result = check_covering(a, a, flip_flop_swap())
    assert not result
    assert result.counterexample == ("0", "A")


def test_non_surjective_map_fails():
    a = reset_automaton()
    result = check_covering(a, a, CoveringMap({"A": "A", "B": "A"}))
    assert not result
    assert "surjective" in result.reason


def test_domain_must_be_closed():
    x = Fsa(("0", "1"), ("S",), ((0,), (0,)))
    result = check_covering(reset_automaton(), x, CoveringMap({"A": "S"}))
    assert not result
    assert result.counterexample == ("1", "A")


def test_alphabet_mismatch_rejected():
    with pytest.raises(CoveringError):
        check_covering(flip_flop(), reset_automaton(), CoveringMap.identity(reset_automaton()))


def test_unknown_states_in_map_rejected():
    a = reset_automaton()
    with pytest.raises(CoveringError):
        check_covering(a, a, CoveringMap({"A": "A", "Z": "B"}))
    with pytest.raises(CoveringError):
        check_covering(a, a, CoveringMap({"A": "A", "B": "Z"}))
