"""Tests for the invariance checks."""

import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lens.config import PERMUTATION_TOLERANCE
from lens.kernel.linalg import Permutation, matmul, max_abs_deviation, permutation_matrix
from lens.kernel.transformer import MaskMode, ModelConfig, embed, forward_embedded, init_weights
from lens.services.invariance_service import (
    DeviationReport,
    InvarianceError,
    InvarianceService,
    config_grid,
    random_permutation,
    random_tokens,
)

TOKENS = [3, 14, 15, 9, 26, 5, 35, 8]


def one_layer(config: ModelConfig, mask: MaskMode = MaskMode.NEG_INF_PRE_SOFTMAX) -> ModelConfig:
    return dataclasses.replace(config, n_layers=1, use_mlp=False, mask_mode=mask)


# ---------------------------------------------------------------- permutation


def test_identity_permutation_is_exact(small_config):
    report = InvarianceService.check_permutation_invariance(
        small_config, 7, TOKENS, Permutation(tuple(range(8)))
    )
    assert report.max_deviation == 0.0
    assert report.passed


def test_swap_of_two_rows(small_config):
    perm = Permutation((2, 1, 0, 3, 4, 5, 6, 7))
    report = InvarianceService.check_permutation_invariance(small_config, 7, TOKENS, perm)
    assert report.max_deviation <= 1e-9
    assert len(report.block_deviations) == small_config.n_layers + 1


def test_single_token_permutation(small_config):
    report = InvarianceService.check_permutation_invariance(small_config, 1, [4], Permutation((0,)))
    assert report.max_deviation == 0.0


def test_attention_scale_does_not_matter(small_config):
    config = dataclasses.replace(small_config, attn_scale=0.5)
    report = InvarianceService.check_permutation_invariance(config, 3, TOKENS, random_permutation(4, 8))
    assert report.passed


def test_permutation_check_without_mlp_or_norm(small_config):
    config = dataclasses.replace(small_config, use_mlp=False, layer_norm=False)
    report = InvarianceService.check_permutation_invariance(config, 5, TOKENS, random_permutation(6, 8))
    assert report.passed


def test_masked_model_rejected(masked_config):
    with pytest.raises(InvarianceError, match="unmasked"):
        InvarianceService.check_permutation_invariance(
            masked_config, 7, TOKENS, Permutation(tuple(range(8)))
        )


def test_permutation_length_must_match(small_config):
    with pytest.raises(InvarianceError):
        InvarianceService.check_permutation_invariance(small_config, 7, TOKENS, Permutation((1, 0)))


@pytest.mark.slow
def test_permutation_invariance_over_config_grid():
    scenarios = 0
    for config, seed in itertools.product(config_grid(), range(6)):
        length = 2 + (7 * seed + config.d_model + config.n_layers) % 11
        tokens = random_tokens(seed, length, config.vocab_size)
        report = InvarianceService.check_permutation_invariance(
            config, seed, tokens, random_permutation(seed + 100, length)
        )
        assert report.passed, report.scenario
        scenarios += 1
    assert scenarios == 54


@pytest.mark.slow
def test_substring_invariance_over_config_grid():
    for config in config_grid(mask_mode=MaskMode.NEG_INF_PRE_SOFTMAX):
        for seed in range(2):
            tokens = random_tokens(seed, 10, config.vocab_size)
            reports = InvarianceService.check_substring_invariance(config, seed, tokens)
            assert all(r.passed for r in reports), config


def test_report_rows_include_logits():
    report = DeviationReport("s", (0.0, 2e-9), 0.0, 1e-9)
    assert [row[1] for row in report.rows()] == ["0", "1", "logits"]
    assert not report.passed
    assert report.failed_assertion
    assert not dataclasses.replace(report, asserted=False).failed_assertion


# ---------------------------------------------------------------- lemmas


def test_softmax_lemma_single_element():
    assert InvarianceService.check_softmax_lemma(1, 0) == 0.0


def test_softmax_lemma_random():
    worst = max(InvarianceService.check_softmax_lemma(1 + seed % 16, seed) for seed in range(1000))
    assert worst <= 1e-12


def test_softmax_lemma_explicit_permutation():
    assert InvarianceService.check_softmax_lemma(3, 2, Permutation((2, 0, 1))) <= 1e-12
    with pytest.raises(InvarianceError):
        InvarianceService.check_softmax_lemma(3, 2, Permutation((1, 0)))


def test_softmax_lemma_rejects_empty_matrix():
    with pytest.raises(InvarianceError):
        InvarianceService.check_softmax_lemma(0, 0)


def test_operation_classes():
    deviations = InvarianceService.check_operation_classes(8, 16, 7)
    assert set(deviations) == {"rescale.softmax", "rescale.layer_norm", "weight", "compare", "weighted_sum"}
    assert all(d <= 1e-12 for d in deviations.values())


def test_permutation_and_inverse_are_permutations():
    perm = random_permutation(11, 9)
    assert sorted(perm.mapping) == list(range(9))
    assert perm.inverse().inverse() == perm


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**16), length=st.integers(min_value=1, max_value=12))
def test_inverse_permutation_undoes_model_permutation(seed, length):
    config = ModelConfig(vocab_size=50, d_model=16, n_layers=2, d_mlp=64, max_len=16, seed=seed)
    weights = init_weights(config)
    perm = random_permutation(seed, length)
    p, p_inverse = permutation_matrix(perm), permutation_matrix(perm.inverse())
    assert np.array_equal(p_inverse, p.T)

    x = embed(random_tokens(seed, length, config.vocab_size), weights)
    assert np.array_equal(matmul(p_inverse, matmul(p, x)), x)

    plain = forward_embedded(x, weights, config)
    permuted = forward_embedded(matmul(p, x), weights, config)
    assert max_abs_deviation(matmul(p_inverse, permuted.logits), plain.logits) <= PERMUTATION_TOLERANCE
    for before, after in zip(plain.snapshots, permuted.snapshots):
        assert max_abs_deviation(matmul(p_inverse, after), before) <= PERMUTATION_TOLERANCE

    tokens = random_tokens(seed, length, config.vocab_size)
    assert InvarianceService.check_permutation_invariance(config, seed, tokens, perm.inverse()).passed


# ---------------------------------------------------------------- substring


def test_substring_exact_for_neginf(masked_config):
    reports = InvarianceService.check_substring_invariance(masked_config, 7, TOKENS)
    assert len(reports) == len(TOKENS)
    assert all(r.asserted for r in reports)
    assert all(r.max_deviation <= 1e-9 for r in reports)


@pytest.mark.parametrize("mask", [MaskMode.ZERO_PRE_SOFTMAX, MaskMode.POST_SOFTMAX_ZERO])
def test_substring_reported_for_approximate_masks(masked_config, mask):
    config = dataclasses.replace(masked_config, mask_mode=mask)
    reports = InvarianceService.check_substring_invariance(config, 7, TOKENS)
    assert not any(r.asserted for r in reports)
    assert not any(r.failed_assertion for r in reports)
    assert all(r.max_deviation > 0.0 for r in reports[:-1])
    assert reports[-1].max_deviation == 0.0


@settings(max_examples=30, deadline=None)
@given(
    scale=st.floats(min_value=0.05, max_value=4.0),
    seed=st.integers(min_value=0, max_value=1000),
    mask=st.sampled_from([MaskMode.NEG_INF_PRE_SOFTMAX, MaskMode.ZERO_PRE_SOFTMAX, MaskMode.POST_SOFTMAX_ZERO]),
)
def test_substring_verdicts_ignore_attention_scale(scale, seed, mask):
    config = ModelConfig(vocab_size=50, d_model=16, n_layers=2, d_mlp=64, max_len=16, mask_mode=mask)
    tokens = random_tokens(seed, 6, config.vocab_size)
    default = InvarianceService.check_substring_invariance(config, seed, tokens)
    scaled = InvarianceService.check_substring_invariance(dataclasses.replace(config, attn_scale=scale), seed, tokens)

    assert [r.asserted for r in scaled] == [r.asserted for r in default]
    assert [r.failed_assertion for r in scaled] == [r.failed_assertion for r in default]
    assert not any(r.failed_assertion for r in scaled)
    if mask is MaskMode.NEG_INF_PRE_SOFTMAX:
        assert all(r.passed for r in scaled)


def test_substring_rejects_unmasked(small_config):
    with pytest.raises(InvarianceError):
        InvarianceService.check_substring_invariance(small_config, 7, TOKENS)


def test_deviation_curve_shrinks(masked_config):
    config = dataclasses.replace(masked_config, mask_mode=MaskMode.ZERO_PRE_SOFTMAX, max_len=40)
    curve = dict(InvarianceService.substring_deviation_curve(config, range(20), [4, 32]))
    assert curve[32] < curve[4]


def test_deviation_curve_is_flat_for_neginf(masked_config):
    curve = InvarianceService.substring_deviation_curve(masked_config, range(3), [2, 4])
    assert all(median <= 1e-9 for _, median in curve)


def test_deviation_curve_needs_room(masked_config):
    with pytest.raises(InvarianceError, match="max_len"):
        InvarianceService.substring_deviation_curve(masked_config, [0], [16])
    with pytest.raises(InvarianceError):
        InvarianceService.substring_deviation_curve(masked_config, [], [4])


# ---------------------------------------------------------------- prefix permutation


def test_prefix_identity_is_exact(masked_config):
    report, earlier = InvarianceService.check_prefix_permutation(
        one_layer(masked_config), 7, TOKENS, Permutation(tuple(range(8)))
    )
    assert report.max_deviation == 0.0
    assert earlier == 0.0


@pytest.mark.parametrize(
    "mask", [MaskMode.NEG_INF_PRE_SOFTMAX, MaskMode.ZERO_PRE_SOFTMAX, MaskMode.POST_SOFTMAX_ZERO]
)
def test_prefix_swap_keeps_last_row(masked_config, mask):
    perm = Permutation((1, 0, 2, 3, 4, 5, 6, 7))
    report, earlier = InvarianceService.check_prefix_permutation(one_layer(masked_config, mask), 7, TOKENS, perm)
    assert report.max_deviation <= 1e-9
    assert earlier > 0.0


def test_prefix_random_permutations(masked_config):
    config = one_layer(masked_config)
    for seed in range(100):
        head = random_permutation(seed, 7).mapping
        report, _ = InvarianceService.check_prefix_permutation(config, seed, TOKENS, Permutation(head + (7,)))
        assert report.passed, report.scenario


def test_prefix_permutation_must_fix_last_row(masked_config):
    with pytest.raises(InvarianceError, match="last row"):
        InvarianceService.check_prefix_permutation(
            one_layer(masked_config), 7, TOKENS, Permutation((7, 1, 2, 3, 4, 5, 6, 0))
        )


def test_prefix_permutation_needs_one_attention_layer(masked_config):
    with pytest.raises(InvarianceError):
        InvarianceService.check_prefix_permutation(masked_config, 7, TOKENS, Permutation(tuple(range(8))))
