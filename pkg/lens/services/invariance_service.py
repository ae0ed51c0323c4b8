"""
Invariance Service
Executable checks of permutation and substring invariance of the forward pass.
"""

import dataclasses
import statistics
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from lens.config import LAYER_NORM_EPS, PERMUTATION_TOLERANCE, logger
from lens.kernel.linalg import (
    Permutation,
    as_matrix,
    layer_norm,
    make_rng,
    matmul,
    max_abs_deviation,
    permutation_matrix,
    row_softmax,
)
from lens.kernel.transformer import (
    MaskMode,
    ModelConfig,
    embed,
    forward,
    forward_embedded,
    init_weights,
)


class InvarianceError(ValueError):
    """Raised when a check is requested outside the setting its claim covers"""
    pass


@dataclass(frozen=True)
class DeviationReport:
    """Max-abs deviations of one scenario, per block snapshot and at the logits"""

    scenario: str
    block_deviations: Tuple[float, ...]
    logit_deviation: float
    tolerance: float
    asserted: bool = True

    @property
    def max_deviation(self) -> float:
        return max((*self.block_deviations, self.logit_deviation))

    @property
    def passed(self) -> bool:
        return all(d <= self.tolerance for d in (*self.block_deviations, self.logit_deviation))

    @property
    def failed_assertion(self) -> bool:
        return self.asserted and not self.passed

    def rows(self) -> List[Tuple[str, str, float, float, bool]]:
        """CSV rows: scenario, block, deviation, tolerance, pass."""
        rows = [
            (self.scenario, str(block), deviation, self.tolerance, deviation <= self.tolerance)
            for block, deviation in enumerate(self.block_deviations)
        ]
        rows.append((self.scenario, "logits", self.logit_deviation, self.tolerance,
                     self.logit_deviation <= self.tolerance))
        return rows


def random_tokens(seed: int, length: int, vocab_size: int) -> List[int]:
    """Deterministic token ids for a scenario."""
    return [int(t) for t in make_rng(seed).integers(0, vocab_size, size=length)]


def random_permutation(seed: int, n: int) -> Permutation:
    """Deterministic permutation of 0..n-1."""
    return Permutation(tuple(int(i) for i in make_rng(seed).permutation(n)))


def _log_report(report: DeviationReport) -> DeviationReport:
    if report.passed:
        logger.info(f"{report.scenario}: max deviation {report.max_deviation:.3e} (pass)")
    elif report.asserted:
        logger.info(f"{report.scenario}: max deviation {report.max_deviation:.3e} (FAIL)")
    else:
        logger.warning(f"{report.scenario}: max deviation {report.max_deviation:.3e} (reported)")
    return report


class InvarianceService:
    """Service for checking architectural invariants"""

    @staticmethod
    def check_permutation_invariance(
        config: ModelConfig,
        seed: int,
        tokens: Sequence[int],
        perm: Permutation,
        tolerance: float = PERMUTATION_TOLERANCE,
    ) -> DeviationReport:
        """
        Compare T(P·X) against P·T(X) at every snapshot and at the logits.

        Args:
            config: Unmasked model configuration
            seed: Weight seed (overrides config.seed)
            tokens: Input token ids; X is their embedding E + P
            perm: Row permutation of the embedded input
            tolerance: Pass threshold

        Returns:
            DeviationReport
        """
        if config.mask_mode.is_masked:
            raise InvarianceError(
                f"Permutation invariance holds only for unmasked models, got mask {config.mask_mode.value}"
            )
        if len(perm) != len(tokens):
            raise InvarianceError(f"Permutation of {len(perm)} rows for {len(tokens)} tokens")

        config = dataclasses.replace(config, seed=seed)
        weights = init_weights(config)
        p = permutation_matrix(perm)
        x = embed(tokens, weights)

        plain = forward_embedded(x, weights, config)
        permuted = forward_embedded(matmul(p, x), weights, config)

        block_deviations = tuple(
            max_abs_deviation(matmul(p, before), after)
            for before, after in zip(plain.snapshots, permuted.snapshots)
        )
        logit_deviation = max_abs_deviation(matmul(p, plain.logits), permuted.logits)
        return _log_report(DeviationReport(
            scenario=f"perm seed={seed} len={len(tokens)} perm={list(perm.mapping)}",
            block_deviations=block_deviations,
            logit_deviation=logit_deviation,
            tolerance=tolerance,
        ))

    @staticmethod
    def check_softmax_lemma(n: int, seed: int, perm: Optional[Permutation] = None) -> float:
        """
        max |softmax(P A Pᵀ) − P softmax(A) Pᵀ| for a random n×n score matrix.

        Args:
            n: Matrix size, >= 1
            seed: Seed for A (and for perm when none is given)
            perm: Optional permutation of size n

        Returns:
            Max-abs deviation
        """
        if n < 1:
            raise InvarianceError(f"n must be >= 1, got {n}")
        rng = make_rng(seed)
        a = as_matrix(rng.normal(0.0, 1.0, size=(n, n)))
        if perm is None:
            perm = Permutation(tuple(int(i) for i in rng.permutation(n)))
        if len(perm) != n:
            raise InvarianceError(f"Permutation of {len(perm)} for a {n}×{n} matrix")

        p = permutation_matrix(perm)
        lhs = row_softmax(matmul(matmul(p, a), p.T))
        rhs = matmul(matmul(p, row_softmax(a)), p.T)
        return max_abs_deviation(lhs, rhs)

    @staticmethod
    def check_operation_classes(
        n: int,
        d: int,
        seed: int,
        perm: Optional[Permutation] = None,
    ) -> Dict[str, float]:
        """
        Permutation equivariance of each basic operation class in isolation.

        Classes: rescale (row softmax, layer norm), weight (X·W), compare
        (X·Xᵀ, which must become P A Pᵀ) and weighted sum (softmax(A)·X).

        Args:
            n: Rows
            d: Columns
            seed: Random seed
            perm: Optional permutation of size n

        Returns:
            Mapping of operation name → max-abs deviation
        """
        rng = make_rng(seed)
        x = as_matrix(rng.normal(0.0, 1.0, size=(n, d)))
        w = as_matrix(rng.normal(0.0, 1.0, size=(d, d)))
        if perm is None:
            perm = Permutation(tuple(int(i) for i in rng.permutation(n)))
        p = permutation_matrix(perm)
        px = matmul(p, x)
        gain, bias = np.ones(d), np.zeros(d)

        a = matmul(x, x.T)
        pa = matmul(px, px.T)
        deviations = {
            "rescale.softmax": max_abs_deviation(row_softmax(px), matmul(p, row_softmax(x))),
            "rescale.layer_norm": max_abs_deviation(
                layer_norm(px, gain, bias, LAYER_NORM_EPS), matmul(p, layer_norm(x, gain, bias, LAYER_NORM_EPS))
            ),
            "weight": max_abs_deviation(matmul(px, w), matmul(p, matmul(x, w))),
            "compare": max_abs_deviation(pa, matmul(matmul(p, a), p.T)),
            "weighted_sum": max_abs_deviation(
                matmul(row_softmax(pa), px), matmul(p, matmul(row_softmax(a), x))
            ),
        }
        logger.info(f"Operation classes (n={n}, d={d}, seed={seed}): max {max(deviations.values()):.3e}")
        return deviations

    @staticmethod
    def check_substring_invariance(
        config: ModelConfig,
        seed: int,
        tokens: Sequence[int],
        tolerance: float = PERMUTATION_TOLERANCE,
    ) -> List[DeviationReport]:
        """
        Compare each prefix's own run against the prefix rows of the full run.

        Reports for exact mask modes are asserted; approximate modes are
        reported only.

        Args:
            config: Masked model configuration
            seed: Weight seed (overrides config.seed)
            tokens: Full input
            tolerance: Pass threshold

        Returns:
            One DeviationReport per prefix length 1..len(tokens)
        """
        if not config.mask_mode.is_masked:
            raise InvarianceError("Substring invariance applies to masked models only")

        config = dataclasses.replace(config, seed=seed)
        weights = init_weights(config)
        full = forward(tokens, weights, config)

        reports = []
        for n in range(1, len(tokens) + 1):
            prefix = forward(tokens[:n], weights, config)
            reports.append(_log_report(DeviationReport(
                scenario=f"substring {config.mask_mode.value} seed={seed} n={n}/{len(tokens)}",
                block_deviations=tuple(
                    max_abs_deviation(own, whole[:n])
                    for own, whole in zip(prefix.snapshots, full.snapshots)
                ),
                logit_deviation=max_abs_deviation(prefix.logits, full.logits[:n]),
                tolerance=tolerance,
                asserted=config.mask_mode.is_exact,
            )))
        return reports

    @staticmethod
    def substring_deviation_curve(
        config: ModelConfig,
        seeds: Sequence[int],
        lengths: Sequence[int],
    ) -> List[Tuple[int, float]]:
        """
        Median marginal effect of appending one token, per length.

        For each length n and seed, rows 0..n-1 of the final snapshot are
        compared between the n-token input and the same input with token n
        appended.

        Args:
            config: Masked configuration with max_len > max(lengths)
            seeds: Weight/token seeds
            lengths: Prefix lengths n

        Returns:
            (length, median max-abs deviation) rows in the order of lengths
        """
        if not config.mask_mode.is_masked:
            raise InvarianceError("The deviation curve applies to masked models only")
        if not seeds:
            raise InvarianceError("The deviation curve needs at least one seed")
        if lengths and max(lengths) + 1 > config.max_len:
            raise InvarianceError(f"Length {max(lengths)} + 1 exceeds max_len {config.max_len}")

        models = [(seed, init_weights(dataclasses.replace(config, seed=seed))) for seed in seeds]
        curve = []
        for n in lengths:
            deviations = []
            for seed, weights in models:
                tokens = random_tokens(seed * 1_000 + n, n + 1, config.vocab_size)
                shorter = forward(tokens[:n], weights, config)
                longer = forward(tokens, weights, config)
                deviations.append(max_abs_deviation(shorter.snapshots[-1], longer.snapshots[-1][:n]))
            curve.append((n, float(statistics.median(deviations))))
            logger.info(f"Marginal deviation at n={n}: median {curve[-1][1]:.3e} over {len(seeds)} seed(s)")
        return curve

    @staticmethod
    def check_prefix_permutation(
        config: ModelConfig,
        seed: int,
        tokens: Sequence[int],
        perm: Permutation,
        tolerance: float = PERMUTATION_TOLERANCE,
    ) -> Tuple[DeviationReport, float]:
        """
        Permute the contents of earlier rows and compare the final row.

        The embedded rows (token plus position part) move together; the mask
        stays on the geometric row index.

        Args:
            config: Masked configuration with one layer and the MLP bypassed
            seed: Weight seed (overrides config.seed)
            tokens: Input token ids
            perm: Permutation that fixes the last index
            tolerance: Pass threshold

        Returns:
            Tuple of (final-row DeviationReport, max deviation of the earlier rows)
        """
        if not config.mask_mode.is_masked:
            raise InvarianceError("Prefix permutation applies to masked models only")
        if config.n_layers != 1 or config.use_mlp:
            raise InvarianceError("Prefix permutation is checked on one attention layer without MLP")
        if len(perm) != len(tokens) or not tokens:
            raise InvarianceError(f"Permutation of {len(perm)} rows for {len(tokens)} tokens")
        if perm.mapping[-1] != len(tokens) - 1:
            raise InvarianceError(f"Permutation {list(perm.mapping)} moves the last row")

        config = dataclasses.replace(config, seed=seed)
        weights = init_weights(config)
        x = embed(tokens, weights)
        plain = forward_embedded(x, weights, config)
        permuted = forward_embedded(matmul(permutation_matrix(perm), x), weights, config)

        report = _log_report(DeviationReport(
            scenario=f"prefix-perm {config.mask_mode.value} seed={seed} perm={list(perm.mapping)}",
            block_deviations=(max_abs_deviation(plain.snapshots[-1][-1:], permuted.snapshots[-1][-1:]),),
            logit_deviation=max_abs_deviation(plain.logits[-1:], permuted.logits[-1:]),
            tolerance=tolerance,
        ))
        earlier = max_abs_deviation(plain.snapshots[-1][:-1], permuted.snapshots[-1][:-1])
        return report, earlier


def config_grid(
    layers: Sequence[int] = (1, 2, 4),
    widths: Sequence[int] = (8, 16, 32),
    mask_mode: MaskMode = MaskMode.UNMASKED,
    max_len: int = 16,
    vocab_size: int = 50,
) -> List[ModelConfig]:
    """Configurations over the standard layers × width grid."""
    return [
        ModelConfig(
            vocab_size=vocab_size,
            d_model=d,
            n_layers=n,
            d_mlp=4 * d,
            max_len=max_len,
            mask_mode=mask_mode,
        )
        for n in layers
        for d in widths
    ]
