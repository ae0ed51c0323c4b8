"""
Kernel Package
Dense primitives and the transformer forward pass.
"""

from lens.kernel.linalg import (
    LinalgError,
    Matrix,
    Permutation,
    as_matrix,
    cosine_similarity,
    gelu,
    layer_norm,
    matmul,
    max_abs_deviation,
    make_rng,
    permutation_matrix,
    row_softmax,
)
from lens.kernel.transformer import (
    MaskMode,
    ModelConfig,
    ModelWeights,
    LayerWeights,
    ResidualTrace,
    TransformerError,
    attention_block,
    decode_top,
    embed,
    forward,
    forward_embedded,
    init_weights,
    mlp_block,
    sinusoidal_positions,
)

__all__ = [
    'LinalgError',
    'Matrix',
    'Permutation',
    'as_matrix',
    'cosine_similarity',
    'gelu',
    'layer_norm',
    'matmul',
    'max_abs_deviation',
    'make_rng',
    'permutation_matrix',
    'row_softmax',
    'MaskMode',
    'ModelConfig',
    'ModelWeights',
    'LayerWeights',
    'ResidualTrace',
    'TransformerError',
    'attention_block',
    'decode_top',
    'embed',
    'forward',
    'forward_embedded',
    'init_weights',
    'mlp_block',
    'sinusoidal_positions',
]
