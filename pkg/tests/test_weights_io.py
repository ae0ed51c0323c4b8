"""Tests for the .npz weight container."""

import json

import numpy as np
import pytest

from lens.kernel.transformer import MaskMode, ModelConfig, TransformerError, init_weights
from lens.kernel.weights_io import CONFIG_KEY, load_weights, save_weights, weights_to_arrays


def test_save_load_is_lossless(tmp_path):
    config = ModelConfig(
        vocab_size=6, d_model=8, n_layers=2, d_mlp=12, max_len=10,
        mask_mode=MaskMode.ZERO_PRE_SOFTMAX, seed=3, attn_scale=0.5,
    )
    weights = init_weights(config)
    path = save_weights(tmp_path / "model.npz", weights, config, vocabulary=list("abcdef"))

    loaded, loaded_config, vocabulary = load_weights(path)
    assert loaded_config == config
    assert vocabulary == tuple("abcdef")
    original = weights_to_arrays(weights)
    for key, array in weights_to_arrays(loaded).items():
        assert np.array_equal(array, original[key]), key


def test_vocabulary_is_optional(tmp_path):
    config = ModelConfig(vocab_size=3, d_model=4, n_layers=1, d_mlp=4, max_len=4)
    path = save_weights(tmp_path / "plain.npz", init_weights(config), config)
    assert load_weights(path)[2] is None


def test_missing_config_rejected(tmp_path):
    path = tmp_path / "bare.npz"
    np.savez(path, E=np.zeros((2, 2)))
    with pytest.raises(TransformerError, match=CONFIG_KEY):
        load_weights(path)


def test_missing_weight_rejected(tmp_path):
    config = ModelConfig(vocab_size=3, d_model=4, n_layers=1, d_mlp=4, max_len=4)
    path = tmp_path / "partial.npz"
    np.savez(path, **{CONFIG_KEY: np.array(json.dumps(config.to_dict())), "E": np.zeros((3, 4))})
    with pytest.raises(TransformerError, match="missing weight"):
        load_weights(path)


def test_damaged_archive_rejected(tmp_path):
    path = tmp_path / "damaged.npz"
    path.write_bytes(b"PK\x03\x04garbage")
    with pytest.raises(TransformerError, match="not a weight container"):
        load_weights(path)


def test_single_array_file_rejected(tmp_path):
    path = tmp_path / "array.npy"
    np.save(path, np.zeros(3))
    with pytest.raises(TransformerError, match="single array"):
        load_weights(path)


@pytest.mark.parametrize(
    "config_text, message",
    [
        (json.dumps({"bogus": 1}), "unknown config key"),
        (json.dumps({"vocab_size": 3, "d_model": 4}), "missing config key"),
        ("[1, 2]", "JSON object"),
        ("{not json", "valid JSON"),
    ],
)
def test_malformed_config_rejected(tmp_path, config_text, message):
    path = tmp_path / "config.npz"
    np.savez(path, **{CONFIG_KEY: np.array(config_text)})
    with pytest.raises(TransformerError, match=message):
        load_weights(path)
