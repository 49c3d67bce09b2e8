"""
Self-describing JSON checkpoints.

    {
      "format_version": 1,
      "config": {...PeGnnConfig...},
      "parameters": {name: {"shape": [...], "values": base64 little-endian f64}},
      "extras": {...}        # e.g. the fitted data normalizer and column names
    }
"""

import base64
import json
import logging
import os
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from src.model.pegnn import PeGnnConfig, PeGnnModel
from src.utils.constants import CHECKPOINT_FORMAT_VERSION
from src.utils.errors import CheckpointError

logger = logging.getLogger(__name__)

_DTYPE = "<f8"


def encode_array(values: np.ndarray) -> Dict[str, Any]:
    arr = np.ascontiguousarray(values, dtype=_DTYPE)
    return {"shape": list(arr.shape), "values": base64.b64encode(arr.tobytes()).decode("ascii")}


def decode_array(entry: Dict[str, Any]) -> np.ndarray:
    raw = base64.b64decode(entry["values"])
    return np.frombuffer(raw, dtype=_DTYPE).astype(np.float64).reshape(entry["shape"])


def checkpoint_dict(model: PeGnnModel, extras: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": model.config.model_dump(mode="json"),
        "parameters": {name: encode_array(p.values) for name, p in model.parameters().items()},
        "extras": extras or {},
    }


def save_checkpoint(model: PeGnnModel, path: str, extras: Optional[Dict[str, Any]] = None) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(checkpoint_dict(model, extras), f, indent=1, sort_keys=True)
    logger.info(f"💾 Saved checkpoint ({model.num_parameters()} parameters) → {path}")
    return path


def model_from_dict(doc: Dict[str, Any]) -> Tuple[PeGnnModel, Dict[str, Any]]:
    version = doc.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint format_version: {version!r}")
    try:
        config = PeGnnConfig(**doc["config"])
    except (KeyError, TypeError, ValidationError) as e:
        raise CheckpointError(f"Invalid checkpoint config: {e}") from e

    model = PeGnnModel(config)
    expected = model.parameters()
    stored = doc.get("parameters", {})
    missing = sorted(set(expected) - set(stored))
    unexpected = sorted(set(stored) - set(expected))
    if missing or unexpected:
        raise CheckpointError(f"Parameter names do not match config (missing={missing}, unexpected={unexpected})")

    for name, tensor in expected.items():
        try:
            values = decode_array(stored[name])
        except (KeyError, ValueError, TypeError) as e:
            raise CheckpointError(f"Cannot decode parameter '{name}': {e}") from e
        if values.shape != tensor.shape:
            raise CheckpointError(f"Parameter '{name}' has shape {values.shape}, config implies {tensor.shape}")
        tensor.values[...] = values
    return model, doc.get("extras", {})


def load_checkpoint(path: str) -> Tuple[PeGnnModel, Dict[str, Any]]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"Checkpoint {path} is not valid JSON: {e}") from e
    model, extras = model_from_dict(doc)
    logger.info(f"📥 Loaded checkpoint {path} ({model.num_parameters()} parameters)")
    return model, extras
