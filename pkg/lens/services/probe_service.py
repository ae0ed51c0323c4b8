"""
Probe Service
Position probes, token/position collision scans, positional-encoding
properties and logit-lens decoding of residual snapshots.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from lens.config import PE_TOLERANCE, logger
from lens.kernel.linalg import cosine_similarity, make_rng
from lens.kernel.transformer import (
    ModelConfig,
    ModelWeights,
    ResidualTrace,
    argmax_rows,
    sinusoidal_positions,
    unembed,
)

# Offsets checked for the near-diagonal decay of position similarity
MONOTONE_WINDOW = 8


class ProbeError(ValueError):
    """Custom exception for invalid probe parameters"""
    pass


@dataclass(frozen=True)
class ProbeCell:
    position: int
    similarity: float


@dataclass(frozen=True)
class ProbeTable:
    """
    Best-matching position per residual row and block.

    cells[row][block] holds the argmax over the first probe_count rows of P.
    """

    cells: Tuple[Tuple[ProbeCell, ...], ...]
    probe_count: int

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.cells), (len(self.cells[0]) if self.cells else 0)

    def column(self, block: int) -> List[int]:
        return [row[block].position for row in self.cells]

    def rows(self) -> List[Tuple[int, int, int, float]]:
        """CSV rows: row, block, position, similarity."""
        return [
            (r, b, cell.position, cell.similarity)
            for r, row in enumerate(self.cells)
            for b, cell in enumerate(row)
        ]


@dataclass(frozen=True)
class CollisionReport:
    """Near-collisions among summed token + position vectors"""

    trials: int
    threshold: float
    collisions: int

    @property
    def rate(self) -> float:
        return self.collisions / self.trials


@dataclass(frozen=True)
class PositionalReport:
    """Sampled properties of a sinusoidal position matrix"""

    max_len: int
    d_model: int
    samples: int
    translation_deviation: float
    symmetry_deviation: float
    self_similarity_max: bool
    monotone_fraction: float
    tolerance: float = PE_TOLERANCE

    @property
    def passed(self) -> bool:
        return (
            self.translation_deviation <= self.tolerance
            and self.symmetry_deviation == 0.0
            and self.self_similarity_max
        )

    def rows(self) -> List[Tuple[str, float, bool]]:
        """CSV rows: property, value, pass."""
        return [
            ("translation", self.translation_deviation, self.translation_deviation <= self.tolerance),
            ("symmetry", self.symmetry_deviation, self.symmetry_deviation == 0.0),
            ("self_similarity", float(self.self_similarity_max), self.self_similarity_max),
            ("monotone_near_diagonal", self.monotone_fraction, True),
        ]


class ProbeService:
    """Service for probing residual streams and position matrices"""

    @staticmethod
    def position_probe(trace: ResidualTrace, weights: ModelWeights, probe_count: int) -> ProbeTable:
        """
        Match every residual row of every snapshot against the first probe_count positions.

        Args:
            trace: Forward trace
            weights: Weights providing P
            probe_count: Number of candidate positions, 1..max_len

        Returns:
            ProbeTable of shape (seq_len, n_blocks + 1)
        """
        max_len = weights.P.shape[0]
        if not 1 <= probe_count <= max_len:
            raise ProbeError(f"probe_count must be in 1..{max_len}, got {probe_count}")

        candidates = weights.P[:probe_count]
        cells = []
        for r in range(trace.seq_len):
            row_cells = []
            for snapshot in trace.snapshots:
                similarities = [cosine_similarity(snapshot[r], p) for p in candidates]
                best = int(np.argmax(similarities))
                row_cells.append(ProbeCell(best, similarities[best]))
            cells.append(tuple(row_cells))

        table = ProbeTable(tuple(cells), probe_count)
        logger.info(f"Position probe: {table.shape[0]} row(s) × {table.shape[1]} block(s)")
        return table

    @staticmethod
    def collision_scan(weights: ModelWeights, trials: int, threshold: float, seed: int) -> CollisionReport:
        """
        Count near-identical summed vectors E[t] + P[p] among random distinct pairs.

        Args:
            weights: Weights providing E and P
            trials: Number of sampled pairs, >= 1
            threshold: Counted when cosine similarity >= 1 - threshold; in (0, 1]
            seed: Sampling seed

        Returns:
            CollisionReport
        """
        if trials < 1:
            raise ProbeError(f"trials must be >= 1, got {trials}")
        if not 0.0 < threshold <= 1.0:
            raise ProbeError(f"threshold must be in (0, 1], got {threshold}")

        vocab_size = weights.E.shape[0]
        max_len = weights.P.shape[0]
        if vocab_size * max_len < 2:
            raise ProbeError("At least two (token, position) pairs are needed")

        rng = make_rng(seed)
        collisions = 0
        for _ in range(trials):
            first = (int(rng.integers(vocab_size)), int(rng.integers(max_len)))
            second = first
            while second == first:
                second = (int(rng.integers(vocab_size)), int(rng.integers(max_len)))
            u = weights.E[first[0]] + weights.P[first[1]]
            v = weights.E[second[0]] + weights.P[second[1]]
            if cosine_similarity(u, v) >= 1.0 - threshold:
                collisions += 1

        report = CollisionReport(trials, threshold, collisions)
        logger.info(f"Collision scan: {collisions}/{trials} pair(s) within {threshold} (rate {report.rate:.4f})")
        return report

    @staticmethod
    def positional_properties(max_len: int, d_model: int, samples: int, seed: int) -> PositionalReport:
        """
        Sample translation invariance, symmetry and self-similarity of sinusoidal positions.

        Args:
            max_len: Positions
            d_model: Width (even)
            samples: Sampled triples (a, b, k) and rows
            seed: Sampling seed

        Returns:
            PositionalReport
        """
        if samples < 1:
            raise ProbeError(f"samples must be >= 1, got {samples}")
        if max_len < 2:
            raise ProbeError(f"max_len must be >= 2, got {max_len}")

        p = sinusoidal_positions(max_len, d_model)
        gram = p @ p.T
        rng = make_rng(seed)

        translation = 0.0
        symmetry = 0.0
        self_max = True
        monotone = 0
        for _ in range(samples):
            a, b = (int(x) for x in rng.integers(0, max_len, size=2))
            k = int(rng.integers(0, max_len - max(a, b)))
            translation = max(translation, abs(float(gram[a, b]) - float(gram[a + k, b + k])))
            symmetry = max(symmetry, abs(float(np.dot(p[a], p[b])) - float(np.dot(p[b], p[a]))))

            if int(np.argmax(gram[a])) != a:
                self_max = False

            window = gram[a, a:min(max_len, a + MONOTONE_WINDOW + 1)]
            if np.all(np.diff(window) <= 0.0):
                monotone += 1

        report = PositionalReport(
            max_len=max_len,
            d_model=d_model,
            samples=samples,
            translation_deviation=translation,
            symmetry_deviation=symmetry,
            self_similarity_max=self_max,
            monotone_fraction=monotone / samples,
        )
        logger.info(
            f"Positional properties (max_len={max_len}, d_model={d_model}): "
            f"translation {translation:.3e}, self-similarity {'max' if self_max else 'NOT max'}"
        )
        return report

    @staticmethod
    def logit_lens(trace: ResidualTrace, weights: ModelWeights, config: ModelConfig) -> List[List[int]]:
        """
        Decode every snapshot through the final norm and unembedding.

        Args:
            trace: Forward trace
            weights: Model weights
            config: Model configuration

        Returns:
            table[block][row] = top token id (lowest id on ties)
        """
        return [argmax_rows(unembed(snapshot, weights, config)) for snapshot in trace.snapshots]
