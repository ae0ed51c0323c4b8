"""
Weight Container
Lossless save/load of model weights as an uncompressed .npz archive.
"""

import dataclasses
import json
import zipfile
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from lens.config import logger
from lens.kernel.transformer import LayerWeights, ModelConfig, ModelWeights, TransformerError

CONFIG_KEY = "__config__"
VOCABULARY_KEY = "__vocabulary__"
LAYER_FIELDS = ("wq", "wk", "wv", "wo", "w1", "w2", "ln1_gain", "ln1_bias", "ln2_gain", "ln2_bias")


def weights_to_arrays(weights: ModelWeights) -> dict:
    """Flatten weights into the key → array layout of the container."""
    arrays = {
        "E": weights.E,
        "P": weights.P,
        "U": weights.U,
        "final.gain": weights.final_gain,
        "final.bias": weights.final_bias,
    }
    for i, layer in enumerate(weights.layers):
        for name in LAYER_FIELDS:
            arrays[f"layer.{i}.{name}"] = getattr(layer, name)
    return arrays


def save_weights(
    path: Union[str, Path],
    weights: ModelWeights,
    config: ModelConfig,
    vocabulary: Optional[Sequence[str]] = None,
) -> Path:
    """
    Write weights, config and optional vocabulary to an .npz container.

    Args:
        path: Destination file
        weights: Model weights
        config: Model configuration (stored as JSON)
        vocabulary: Optional token labels

    Returns:
        Path written
    """
    weights.check_shapes(config)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    arrays = weights_to_arrays(weights)
    arrays[CONFIG_KEY] = np.array(json.dumps(config.to_dict(), sort_keys=True))
    if vocabulary is not None:
        arrays[VOCABULARY_KEY] = np.array(list(vocabulary), dtype=np.str_)

    with open(path, "wb") as handle:
        np.savez(handle, **arrays)
    logger.info(f"Saved weights to {path} ({len(arrays)} entries)")
    return path


def config_from_json(text: str, source: Union[str, Path] = "<config>") -> ModelConfig:
    """
    Parse the stored config JSON, rejecting unknown or missing keys.

    Args:
        text: JSON object written by save_weights
        source: Name used in error messages

    Returns:
        ModelConfig
    """
    try:
        values = json.loads(text)
    except json.JSONDecodeError as e:
        raise TransformerError(f"{source}: config is not valid JSON ({e})")
    if not isinstance(values, dict):
        raise TransformerError(f"{source}: config must be a JSON object")

    known = {f.name for f in dataclasses.fields(ModelConfig)}
    required = {
        f.name for f in dataclasses.fields(ModelConfig)
        if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
    }
    unknown = sorted(set(values) - known)
    if unknown:
        raise TransformerError(f"{source}: unknown config key(s) {unknown}")
    missing = sorted(required - set(values))
    if missing:
        raise TransformerError(f"{source}: missing config key(s) {missing}")
    try:
        return ModelConfig(**values)
    except TypeError as e:
        raise TransformerError(f"{source}: invalid config ({e})")


def load_weights(path: Union[str, Path]) -> Tuple[ModelWeights, ModelConfig, Optional[Tuple[str, ...]]]:
    """
    Read a container written by save_weights.

    Args:
        path: Source file

    Returns:
        Tuple of (weights, config, vocabulary or None)

    Raises:
        TransformerError: The file is not a weight container or is incomplete
    """
    try:
        archive = np.load(Path(path), allow_pickle=False)
    except (zipfile.BadZipFile, EOFError) as e:
        raise TransformerError(f"{path} is not a weight container ({e})")
    if not isinstance(archive, np.lib.npyio.NpzFile):
        raise TransformerError(f"{path} is a single array, not a weight container")

    try:
        with archive:
            if CONFIG_KEY not in archive.files:
                raise TransformerError(f"{path} has no {CONFIG_KEY} entry")
            config = config_from_json(str(archive[CONFIG_KEY]), path)

            def take(key: str) -> np.ndarray:
                if key not in archive.files:
                    raise TransformerError(f"{path} is missing weight {key}")
                array = np.array(archive[key], dtype=np.float64)
                array.setflags(write=False)
                return array

            layers = tuple(
                LayerWeights(**{name: take(f"layer.{i}.{name}") for name in LAYER_FIELDS})
                for i in range(config.n_layers)
            )
            weights = ModelWeights(
                E=take("E"),
                P=take("P"),
                layers=layers,
                final_gain=take("final.gain"),
                final_bias=take("final.bias"),
                U=take("U"),
            )
            vocabulary = None
            if VOCABULARY_KEY in archive.files:
                vocabulary = tuple(str(label) for label in archive[VOCABULARY_KEY])
    except (zipfile.BadZipFile, KeyError) as e:
        raise TransformerError(f"{path} has a damaged entry ({e})")

    weights.check_shapes(config)
    logger.info(f"Loaded weights from {path}")
    return weights, config, vocabulary
