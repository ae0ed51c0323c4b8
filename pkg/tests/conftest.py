"""
Shared fixtures. The run ledger and output directory are pointed at a
scratch directory before any lens module reads its configuration.
"""

import os
import tempfile
from pathlib import Path

_SCRATCH = tempfile.mkdtemp(prefix="lens-tests-")
os.environ.setdefault("LENS_DATABASE_PATH", os.path.join(_SCRATCH, "lens.db"))
os.environ.setdefault("LENS_OUTPUT_PATH", os.path.join(_SCRATCH, "out"))
os.environ.setdefault("LENS_LOG_LEVEL", "WARNING")

import pytest  # noqa: E402

from lens.kernel.transformer import MaskMode, ModelConfig  # noqa: E402

MACHINES = Path(__file__).resolve().parent.parent / "machines"


@pytest.fixture
def machines() -> Path:
    return MACHINES


@pytest.fixture
def small_config() -> ModelConfig:
    return ModelConfig(vocab_size=50, d_model=16, n_layers=2, d_mlp=64, max_len=16)


@pytest.fixture
def masked_config() -> ModelConfig:
    return ModelConfig(
        vocab_size=50,
        d_model=16,
        n_layers=2,
        d_mlp=64,
        max_len=16,
        mask_mode=MaskMode.NEG_INF_PRE_SOFTMAX,
    )
