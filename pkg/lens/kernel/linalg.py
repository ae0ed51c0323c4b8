"""
Linear Algebra Core
Deterministic dense primitives over float64 matrices.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.special import erf

# Marker for masked attention scores; consumed only by row_softmax.
MASK_SENTINEL = -np.inf

Matrix = np.ndarray


class LinalgError(ValueError):
    """Custom exception for rejected linear-algebra inputs"""
    pass


@dataclass(frozen=True)
class Permutation:
    """Bijection on 0..n-1; output row i of P·X is input row mapping[i]"""

    mapping: Tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(i) for i in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise LinalgError(f"Not a permutation of 0..{len(mapping) - 1}: {list(self.mapping)}")
        object.__setattr__(self, "mapping", mapping)

    def __len__(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def inverse(self) -> "Permutation":
        inverse = [0] * len(self.mapping)
        for i, source in enumerate(self.mapping):
            inverse[source] = i
        return Permutation(tuple(inverse))

    def is_identity(self) -> bool:
        return self.mapping == tuple(range(len(self.mapping)))


def as_matrix(values) -> Matrix:
    """
    Coerce values into a 2-D float64 matrix.

    Args:
        values: Nested sequence or array

    Returns:
        Read-only float64 matrix
    """
    matrix = np.array(values, dtype=np.float64)
    if matrix.ndim != 2:
        raise LinalgError(f"Expected a 2-D matrix, got shape {matrix.shape}")
    matrix.setflags(write=False)
    return matrix


def _finished(result: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(result)):
        raise LinalgError(f"{op} produced non-finite entries")
    result.setflags(write=False)
    return result


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """
    Matrix product a·b.

    The product goes through numpy's fixed-order kernel, so results are
    bit-reproducible within one build for identical shapes.

    Args:
        a: Left matrix (m×k)
        b: Right matrix (k×n)

    Returns:
        m×n product
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise LinalgError(f"Cannot multiply shapes {a.shape} and {b.shape}")
    return _finished(np.matmul(a, b), "matmul")


def permutation_matrix(p: Permutation) -> Matrix:
    """0/1 matrix whose left action sends row p[i] to row i."""
    n = len(p)
    matrix = np.zeros((n, n), dtype=np.float64)
    matrix[np.arange(n), list(p.mapping)] = 1.0
    matrix.setflags(write=False)
    return matrix


def row_softmax(m: Matrix) -> Matrix:
    """
    Softmax along each row with per-row max subtraction.

    Entries equal to MASK_SENTINEL receive weight exactly 0.

    Args:
        m: Scores, finite or MASK_SENTINEL

    Returns:
        Row-stochastic matrix of the same shape
    """
    if m.size == 0:
        return _finished(np.array(m, dtype=np.float64), "row_softmax")
    if np.any(np.isnan(m)) or np.any(m == np.inf):
        raise LinalgError("row_softmax requires finite scores or the mask sentinel")

    row_max = np.max(m, axis=1, keepdims=True)
    dead_rows = np.where(np.isneginf(row_max[:, 0]))[0]
    if dead_rows.size:
        raise LinalgError(f"Rows fully masked, cannot normalize: {dead_rows.tolist()}")

    exps = np.exp(m - row_max)
    return _finished(exps / np.sum(exps, axis=1, keepdims=True), "row_softmax")


def layer_norm(m: Matrix, gain: Sequence[float], bias: Sequence[float], eps: float) -> Matrix:
    """
    Row-wise standardisation followed by gain and bias.

    Args:
        m: Input matrix
        gain: Per-column scale (length m.cols)
        bias: Per-column shift (length m.cols)
        eps: Variance floor, > 0

    Returns:
        Normalised matrix
    """
    gain = np.asarray(gain, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if gain.shape != (m.shape[1],) or bias.shape != (m.shape[1],):
        raise LinalgError(
            f"Gain/bias lengths {gain.shape}/{bias.shape} do not match {m.shape[1]} columns"
        )
    if eps <= 0:
        raise LinalgError(f"eps must be positive, got {eps}")

    mean = np.mean(m, axis=1, keepdims=True)
    var = np.var(m, axis=1, keepdims=True)
    return _finished((m - mean) / np.sqrt(var + eps) * gain + bias, "layer_norm")


def gelu(m: Matrix) -> Matrix:
    """Exact-erf GELU, x·Φ(x)."""
    return _finished(0.5 * m * (1.0 + erf(m / np.sqrt(2.0))), "gelu")


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """
    Cosine of the angle between two vectors.

    Args:
        u: First vector
        v: Second vector, same length

    Returns:
        dot(u, v) / (|u| |v|), clipped to [-1, 1]
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1 or u.size == 0:
        raise LinalgError(f"Vectors must be non-empty and equal length, got {u.shape} and {v.shape}")

    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0.0 or norm_v == 0.0:
        raise LinalgError("Cosine similarity undefined for a zero-norm vector")
    return float(np.clip(np.dot(u, v) / (norm_u * norm_v), -1.0, 1.0))


def max_abs_deviation(a: Matrix, b: Matrix) -> float:
    """Largest absolute entrywise difference; 0.0 for empty matrices."""
    if a.shape != b.shape:
        raise LinalgError(f"Cannot compare shapes {a.shape} and {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def make_rng(seed: int) -> np.random.Generator:
    """
    Deterministic generator used everywhere randomness is needed.

    PCG64 seeded with the given integer; identical seeds give identical streams.
    """
    return np.random.Generator(np.random.PCG64(seed))
