"""
Transformer Kernel
Minimal single-head, pre-norm encoder forward pass with an inspectable
residual stream.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from lens.config import INIT_SCALE, LAYER_NORM_EPS, logger
from lens.kernel.linalg import (
    MASK_SENTINEL,
    Matrix,
    as_matrix,
    gelu,
    layer_norm,
    make_rng,
    matmul,
    row_softmax,
)


class TransformerError(ValueError):
    """Custom exception for invalid model configurations or inputs"""
    pass


class MaskMode(str, Enum):
    """Attention mask placement"""
    UNMASKED = "unmasked"
    NEG_INF_PRE_SOFTMAX = "neginf"
    ZERO_PRE_SOFTMAX = "zeropre"
    POST_SOFTMAX_ZERO = "postzero"

    @property
    def is_masked(self) -> bool:
        return self is not MaskMode.UNMASKED

    @property
    def is_exact(self) -> bool:
        """Whether prefixes are processed exactly as inside the full input."""
        # Post-softmax zeroing still normalises over later keys' scores.
        return self is MaskMode.NEG_INF_PRE_SOFTMAX


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions and switches of a model"""

    vocab_size: int
    d_model: int
    n_layers: int
    d_mlp: int
    max_len: int
    mask_mode: MaskMode = MaskMode.UNMASKED
    seed: int = 0
    attn_scale: Optional[float] = None
    use_mlp: bool = True
    layer_norm: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mask_mode", MaskMode(self.mask_mode))
        for name in ("vocab_size", "d_model", "d_mlp", "max_len"):
            if getattr(self, name) < 1:
                raise TransformerError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_layers < 0:
            raise TransformerError(f"n_layers must be >= 0, got {self.n_layers}")
        if self.attn_scale is not None and not self.attn_scale > 0:
            raise TransformerError(f"attn_scale must be positive, got {self.attn_scale}")

    @property
    def effective_attn_scale(self) -> float:
        if self.attn_scale is not None:
            return float(self.attn_scale)
        return 1.0 / math.sqrt(self.d_model)

    def to_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "d_model": self.d_model,
            "n_layers": self.n_layers,
            "d_mlp": self.d_mlp,
            "max_len": self.max_len,
            "mask_mode": self.mask_mode.value,
            "seed": self.seed,
            "attn_scale": self.attn_scale,
            "use_mlp": self.use_mlp,
            "layer_norm": self.layer_norm,
        }


@dataclass(frozen=True)
class LayerWeights:
    """Weights of one attention + MLP block"""

    wq: Matrix
    wk: Matrix
    wv: Matrix
    wo: Matrix
    w1: Matrix
    w2: Matrix
    ln1_gain: np.ndarray
    ln1_bias: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray


@dataclass(frozen=True)
class ModelWeights:
    """All fixed parameters of a model"""

    E: Matrix
    P: Matrix
    layers: Tuple[LayerWeights, ...]
    final_gain: np.ndarray
    final_bias: np.ndarray
    U: Matrix

    def check_shapes(self, config: ModelConfig) -> None:
        """Raise TransformerError unless every shape conforms to config."""
        d, v, h = config.d_model, config.vocab_size, config.d_mlp
        expected = {
            "E": (self.E.shape, (v, d)),
            "P": (self.P.shape, (config.max_len, d)),
            "U": (self.U.shape, (d, v)),
            "final_gain": (self.final_gain.shape, (d,)),
            "final_bias": (self.final_bias.shape, (d,)),
        }
        if len(self.layers) != config.n_layers:
            raise TransformerError(f"Expected {config.n_layers} layers, got {len(self.layers)}")
        for i, layer in enumerate(self.layers):
            for name, shape in (("wq", (d, d)), ("wk", (d, d)), ("wv", (d, d)), ("wo", (d, d)),
                                ("w1", (d, h)), ("w2", (h, d)), ("ln1_gain", (d,)),
                                ("ln1_bias", (d,)), ("ln2_gain", (d,)), ("ln2_bias", (d,))):
                expected[f"layer.{i}.{name}"] = (getattr(layer, name).shape, shape)

        for name, (actual, wanted) in expected.items():
            if actual != wanted:
                raise TransformerError(f"Weight {name} has shape {actual}, expected {wanted}")


@dataclass(frozen=True)
class ResidualTrace:
    """Residual stream snapshots R_0..R_L plus final logits"""

    snapshots: Tuple[Matrix, ...]
    logits: Matrix

    @property
    def seq_len(self) -> int:
        return self.snapshots[0].shape[0]

    @property
    def n_blocks(self) -> int:
        return len(self.snapshots) - 1


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


def sinusoidal_positions(max_len: int, d_model: int) -> Matrix:
    """
    Fixed sine/cosine position matrix.

    Entry (pos, 2i) = sin(pos / 10000^(2i/d)); entry (pos, 2i+1) = cos of the same angle.

    Args:
        max_len: Number of positions
        d_model: Width, must be even

    Returns:
        max_len × d_model matrix
    """
    if d_model % 2:
        raise TransformerError(f"d_model must be even for sinusoidal positions, got {d_model}")

    positions = np.arange(max_len, dtype=np.float64)[:, None]
    rates = np.power(10000.0, -np.arange(0, d_model, 2, dtype=np.float64) / d_model)
    angles = positions * rates[None, :]

    table = np.empty((max_len, d_model), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)
    return _frozen(table)


def init_weights(config: ModelConfig) -> ModelWeights:
    """
    Draw random weights from the config's seed.

    Every matrix is drawn i.i.d. uniform in [-INIT_SCALE, INIT_SCALE] from
    PCG64(config.seed), in this order: E, then per layer Wq, Wk, Wv, Wo, W1, W2,
    then U. Layer-norm gains start at 1 and biases at 0; P is sinusoidal.

    Args:
        config: Model configuration

    Returns:
        Immutable ModelWeights
    """
    rng = make_rng(config.seed)
    d, h = config.d_model, config.d_mlp

    def draw(rows: int, cols: int) -> Matrix:
        return _frozen(rng.uniform(-INIT_SCALE, INIT_SCALE, size=(rows, cols)))

    E = draw(config.vocab_size, d)
    layers = []
    for _ in range(config.n_layers):
        layers.append(LayerWeights(
            wq=draw(d, d),
            wk=draw(d, d),
            wv=draw(d, d),
            wo=draw(d, d),
            w1=draw(d, h),
            w2=draw(h, d),
            ln1_gain=_frozen(np.ones(d)),
            ln1_bias=_frozen(np.zeros(d)),
            ln2_gain=_frozen(np.ones(d)),
            ln2_bias=_frozen(np.zeros(d)),
        ))
    U = draw(d, config.vocab_size)

    logger.debug(f"Initialised weights (seed={config.seed}, d_model={d}, layers={config.n_layers})")
    return ModelWeights(
        E=E,
        P=sinusoidal_positions(config.max_len, d),
        layers=tuple(layers),
        final_gain=_frozen(np.ones(d)),
        final_bias=_frozen(np.zeros(d)),
        U=U,
    )


def embed(tokens: Sequence[int], weights: ModelWeights) -> Matrix:
    """
    Embedded input E[tokens] + P[0..n).

    Args:
        tokens: Token ids
        weights: Model weights

    Returns:
        n × d_model matrix
    """
    vocab_size, d_model = weights.E.shape
    tokens = [int(t) for t in tokens]
    bad = [t for t in tokens if not 0 <= t < vocab_size]
    if bad:
        raise TransformerError(f"Token ids out of range [0, {vocab_size}): {bad}")
    if len(tokens) > weights.P.shape[0]:
        raise TransformerError(f"Sequence length {len(tokens)} exceeds max_len {weights.P.shape[0]}")

    if not tokens:
        return as_matrix(np.zeros((0, d_model)))
    return _frozen(weights.E[tokens] + weights.P[:len(tokens)])


def _strict_upper(n: int) -> np.ndarray:
    return np.triu(np.ones((n, n), dtype=bool), k=1)


def attention_weights(x: Matrix, layer: LayerWeights, mask_mode: MaskMode, attn_scale: float) -> Matrix:
    """
    Row-stochastic (or sub-stochastic, for post-masking) attention matrix.

    Modes:
        UNMASKED: softmax(A)
        NEG_INF_PRE_SOFTMAX: strictly-upper scores set to the sentinel, then softmax
        ZERO_PRE_SOFTMAX: strictly-upper scores set to 0, softmax, then strictly-upper
            weights zeroed without renormalising
        POST_SOFTMAX_ZERO: softmax(A), then strictly-upper weights zeroed without
            renormalising
    """
    q = matmul(x, layer.wq)
    k = matmul(x, layer.wk)
    scores = matmul(q, k.T) * attn_scale
    upper = _strict_upper(x.shape[0])

    if mask_mode is MaskMode.NEG_INF_PRE_SOFTMAX:
        return row_softmax(np.where(upper, MASK_SENTINEL, scores))
    if mask_mode is MaskMode.ZERO_PRE_SOFTMAX:
        return _frozen(np.where(upper, 0.0, row_softmax(np.where(upper, 0.0, scores))))
    if mask_mode is MaskMode.POST_SOFTMAX_ZERO:
        return _frozen(np.where(upper, 0.0, row_softmax(scores)))
    return row_softmax(scores)


def attention_block(
    x: Matrix,
    layer: LayerWeights,
    mask_mode: MaskMode,
    attn_scale: Optional[float] = None,
) -> Matrix:
    """
    Single-head attention branch: weights · (x Wv) · Wo.

    Args:
        x: Block input (n × d_model)
        layer: Layer weights
        mask_mode: Mask placement
        attn_scale: Score multiplier; defaults to 1/sqrt(d_model)

    Returns:
        n × d_model output, to be added to the residual stream
    """
    d_model = layer.wq.shape[0]
    if x.ndim != 2 or x.shape[1] != d_model:
        raise TransformerError(f"Attention input has shape {x.shape}, expected (n, {d_model})")
    if x.shape[0] == 0:
        return as_matrix(np.zeros((0, d_model)))

    scale = attn_scale if attn_scale is not None else 1.0 / math.sqrt(d_model)
    weights = attention_weights(x, layer, MaskMode(mask_mode), scale)
    return matmul(matmul(weights, matmul(x, layer.wv)), layer.wo)


def mlp_block(x: Matrix, layer: LayerWeights) -> Matrix:
    """gelu(x W1) W2, to be added to the residual stream."""
    if x.ndim != 2 or x.shape[1] != layer.w1.shape[0]:
        raise TransformerError(f"MLP input has shape {x.shape}, expected (n, {layer.w1.shape[0]})")
    return matmul(gelu(matmul(x, layer.w1)), layer.w2)


def _norm(x: Matrix, gain: np.ndarray, bias: np.ndarray, config: ModelConfig) -> Matrix:
    if not config.layer_norm:
        return x
    return layer_norm(x, gain, bias, LAYER_NORM_EPS)


def forward_embedded(x: Matrix, weights: ModelWeights, config: ModelConfig) -> ResidualTrace:
    """
    Run the block stack on an already-embedded input.

    Each block: x += attention(norm(x)); x += mlp(norm(x)). A snapshot is kept
    after every full block; logits = norm(x) · U.

    Args:
        x: Embedded input (n × d_model)
        weights: Model weights
        config: Model configuration

    Returns:
        ResidualTrace with n_layers + 1 snapshots
    """
    weights.check_shapes(config)
    if x.ndim != 2 or x.shape[1] != config.d_model:
        raise TransformerError(f"Input has shape {x.shape}, expected (n, {config.d_model})")

    x = as_matrix(x)
    snapshots: List[Matrix] = [x]
    for layer in weights.layers:
        x = _frozen(x + attention_block(
            _norm(x, layer.ln1_gain, layer.ln1_bias, config),
            layer,
            config.mask_mode,
            config.effective_attn_scale,
        ))
        if config.use_mlp:
            x = _frozen(x + mlp_block(_norm(x, layer.ln2_gain, layer.ln2_bias, config), layer))
        snapshots.append(x)

    logits = matmul(_norm(x, weights.final_gain, weights.final_bias, config), weights.U)
    return ResidualTrace(snapshots=tuple(snapshots), logits=logits)


def forward(tokens: Sequence[int], weights: ModelWeights, config: ModelConfig) -> ResidualTrace:
    """Embed tokens and run the block stack."""
    return forward_embedded(embed(tokens, weights), weights, config)


def unembed(x: Matrix, weights: ModelWeights, config: ModelConfig) -> Matrix:
    """Decode any residual snapshot through the final norm and U."""
    return matmul(_norm(x, weights.final_gain, weights.final_bias, config), weights.U)


def argmax_rows(logits: Matrix) -> List[int]:
    """Per-row argmax; the lowest id wins ties."""
    # np.argmax returns the first maximal index
    return [int(i) for i in np.argmax(logits, axis=1)] if logits.shape[0] else []


def decode_top(trace: ResidualTrace) -> List[int]:
    """
    Highest-scoring token per row of the final logits.

    Args:
        trace: Forward trace

    Returns:
        One token id per input position
    """
    return argmax_rows(trace.logits)
