"""Tests for the reset-automaton emulator and model/automaton comparison."""

import itertools

import numpy as np
import pytest

from lens.automata.fsa import flip_flop, state_sequence
from lens.kernel.transformer import ModelConfig, init_weights
from lens.kernel.weights_io import load_weights, save_weights
from lens.services.bridge_service import (
    BridgeError,
    BridgeSpec,
    ComparisonReport,
    LabeledModel,
    all_words,
    build_reset_shortcut_model,
    compare_model_to_fsa,
    minimum_beta,
    random_words,
)


@pytest.fixture(scope="module")
def model() -> LabeledModel:
    return build_reset_shortcut_model(BridgeSpec())


def test_default_spec_emulates_flip_flop():
    spec = BridgeSpec()
    assert spec.alphabet == ("0", "1", "e")
    assert spec.vocabulary == ("0", "1", "e", "A", "B")
    assert spec.d_model == 6
    assert spec.to_fsa() == flip_flop()


def test_decodes_reset_example(model):
    assert model.decode(list("0110")) == ["A", "B", "B", "A"]


def test_identity_tokens_keep_latest_reset(model):
    assert model.decode(list("1ee0e")) == ["B", "B", "B", "A", "A"]


def test_all_identity_input_decodes_initial_state(model):
    for n in (1, 5, 32):
        assert model.decode(["e"] * n) == ["A"] * n


def test_empty_word(model):
    assert model.decode([]) == []


@pytest.mark.parametrize("length", range(1, 7))
def test_exhaustive_short_words(model, length):
    a = flip_flop()
    for word in itertools.product(a.alphabet, repeat=length):
        assert model.decode(word) == state_sequence(a, "A", word), word


@pytest.mark.slow
def test_exhaustive_words_up_to_ten(model):
    report = compare_model_to_fsa(model, flip_flop(), "A", all_words(flip_flop().alphabet, 10), jobs=4)
    assert report.all_match


def test_random_words_up_to_sixteen(model):
    words = random_words(flip_flop().alphabet, 500, 16, seed=7)
    report = compare_model_to_fsa(model, flip_flop(), "A", words)
    assert report.accuracy == 1.0
    assert report.all_match


def test_long_words_at_max_length(model):
    words = random_words(flip_flop().alphabet, 50, 32, seed=3)
    assert compare_model_to_fsa(model, flip_flop(), "A", words).all_match


def test_larger_beta_gives_identical_output():
    base = build_reset_shortcut_model(BridgeSpec())
    doubled = build_reset_shortcut_model(BridgeSpec(beta=160.0))
    for word in random_words(("0", "1", "e"), 100, 20, seed=11):
        assert base.decode(word) == doubled.decode(word)


def test_output_is_prefix_consistent(model):
    word = list("e01e1e0ee1")
    full = model.decode(word)
    for n in range(1, len(word) + 1):
        assert model.decode(word[:n]) == full[:n]


def test_three_reset_automaton():
    spec = BridgeSpec(
        identity_symbol="k",
        resets=(("a", "X"), ("b", "Y"), ("c", "Z")),
        states=("X", "Y", "Z"),
        initial_state="Z",
        max_len=12,
    )
    model = build_reset_shortcut_model(spec)
    words = all_words(spec.alphabet, 5)
    assert compare_model_to_fsa(model, spec.to_fsa(), "Z", words, jobs=2).all_match


def test_state_without_reset_is_reachable_only_as_initial():
    spec = BridgeSpec(resets=(("0", "A"),), states=("A", "B"), initial_state="B", max_len=8)
    model = build_reset_shortcut_model(spec)
    assert model.decode(list("ee0e")) == ["B", "B", "A", "A"]


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(gamma=0.5),
        dict(beta=0.0),
        dict(max_len=0),
        dict(resets=()),
        dict(resets=(("0", "A"), ("0", "B"))),
        dict(resets=(("0", "A"), ("1", "A"))),
        dict(resets=(("0", "A"), ("e", "B"))),
        dict(initial_state="C"),
        dict(states=("A", "B", "A")),
        dict(states=("A", "B", "e")),
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(BridgeError):
        BridgeSpec(**kwargs)


def test_minimum_beta_bound():
    assert minimum_beta(2.0, 32) < 80.0
    assert minimum_beta(2.0, 64) > 80.0
    assert minimum_beta(2.0, 1) == pytest.approx(1.0)


def test_low_beta_is_built_with_a_warning(caplog):
    with caplog.at_level("WARNING", logger="lens"):
        build_reset_shortcut_model(BridgeSpec(beta=10.0))
    assert "may leak" in caplog.text


def test_random_model_reports_accuracy():
    config = ModelConfig(vocab_size=5, d_model=8, n_layers=1, d_mlp=8, max_len=8, seed=3)
    random_model = LabeledModel(config, init_weights(config), ("0", "1", "e", "A", "B"))
    report = compare_model_to_fsa(random_model, flip_flop(), "A", all_words(("0", "1", "e"), 3))
    assert len(report.results) == 3 + 9 + 27
    assert report.positions == 3 + 18 + 81
    assert 0.0 <= report.accuracy <= 1.0
    assert [row[0] for row in report.rows()][:3] == ["0", "1", "e"]


def test_empty_word_set_has_full_accuracy(model):
    report = compare_model_to_fsa(model, flip_flop(), "A", [])
    assert report.accuracy == 1.0
    assert report.all_match
    assert ComparisonReport().positions == 0


def test_vocabulary_must_cover_the_automaton():
    config = ModelConfig(vocab_size=4, d_model=8, n_layers=1, d_mlp=8, max_len=8)
    partial = LabeledModel(config, init_weights(config), ("0", "1", "e", "A"))
    with pytest.raises(BridgeError, match="'B'"):
        compare_model_to_fsa(partial, flip_flop(), "A", [("0",)])


def test_vocabulary_size_must_match_config():
    config = ModelConfig(vocab_size=4, d_model=8, n_layers=1, d_mlp=8, max_len=8)
    with pytest.raises(BridgeError):
        LabeledModel(config, init_weights(config), ("0", "1", "e"))


def test_words_longer_than_max_len_rejected(model):
    with pytest.raises(BridgeError, match="max_len"):
        compare_model_to_fsa(model, flip_flop(), "A", [("e",) * 33])


def test_unknown_symbols_rejected(model):
    with pytest.raises(BridgeError):
        model.encode(["x"])


def test_saved_model_decodes_identically(model, tmp_path):
    path = save_weights(tmp_path / "bridge.npz", model.weights, model.config, model.vocabulary)
    weights, config, vocabulary = load_weights(path)
    loaded = LabeledModel(config, weights, vocabulary)
    assert config == model.config
    assert np.array_equal(weights.layers[0].wk, model.weights.layers[0].wk)
    for word in random_words(("0", "1", "e"), 50, 12, seed=5):
        assert loaded.decode(word) == model.decode(word)


def test_bridge_weights_are_read_only(model):
    with pytest.raises(ValueError):
        model.weights.E[0, 0] = 2.0
    assert model.config.use_mlp is False
