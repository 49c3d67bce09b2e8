"""
Run configuration loader.

A run config is a JSON (or YAML) document:

    {
      "data":  {"path": "d.csv", "lon_col": "lon", "lat_col": "lat", "target_col": "y",
                "feature_cols": [], "test_fraction": 0.2, "split_seed": 42, "strict": true},
      "train": {...TrainConfig fields...},
      "out_dir": "runs/latest"
    }

Every field is optional; unknown keys are rejected at every level.
"""

import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import yaml
from pydantic import BaseModel, ConfigDict, Field

from src.data.dataset import CsvSchema
from src.training.config import TrainConfig
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)


class DataSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = None
    lon_col: str = "lon"
    lat_col: str = "lat"
    target_col: str = "y"
    feature_cols: List[str] = Field(default_factory=list)
    test_fraction: float = Field(default=0.2, gt=0, lt=1)
    split_seed: int = 42
    strict: bool = True

    def csv_schema(self) -> CsvSchema:
        return CsvSchema(self.lon_col, self.lat_col, self.target_col, tuple(self.feature_cols))


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    data: DataSchema = Field(default_factory=DataSchema)
    train: TrainConfig = Field(default_factory=TrainConfig)
    out_dir: str = "runs/latest"

    def echo(self) -> Dict[str, Any]:
        """Effective config without the output location, so reruns elsewhere compare equal."""
        return self.model_dump(mode="json", by_alias=True, exclude={"out_dir"})


def load_yaml(path: str) -> Dict[str, Any]:
    """Load a YAML or JSON config file. Raises FileNotFoundError if missing."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must contain a mapping, got {type(data).__name__}")
    logger.info(f"✅ Loaded config: {path}")
    return data


def apply_overrides(raw: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Apply dotted ``section.field=value`` overrides; values are parsed as YAML
    scalars/lists, so ``train.lambda=0.5`` and ``data.feature_cols=[a,b]`` work.
    """
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"Override must look like section.field=value, got {item!r}")
        key, value = item.split("=", 1)
        parts = key.strip().split(".")
        target = merged
        for part in parts[:-1]:
            node = target.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"Override {key!r} descends into non-mapping '{part}'")
            target = node
        target[parts[-1]] = yaml.safe_load(value)
    return merged


def load_run_config(
    path: Optional[str] = None,
    overrides: Sequence[str] = (),
    data_path: Optional[str] = None,
    out_dir: Optional[str] = None,
) -> RunConfig:
    """
    Read (optional) config file, apply overrides, validate.

    ``data_path`` and ``out_dir`` are literal strings from the command line and
    bypass YAML parsing, so a directory named ``2024`` or ``on`` stays a string.
    """
    raw = apply_overrides(load_yaml(path) if path else {}, overrides)
    if data_path is not None:
        data = raw.get("data") or {}
        if not isinstance(data, dict):
            raise ConfigError(f"Config section 'data' must be a mapping, got {type(data).__name__}")
        raw["data"] = {**data, "path": data_path}
    if out_dir is not None:
        raw["out_dir"] = out_dir
    return RunConfig.model_validate(raw)
