"""
Min-max normalization fitted on the training split only.

Values outside the training range are not clamped (a test target above the
training maximum maps above 1.0). Constant columns map to 0.0.
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict

import numpy as np

from src.data.dataset import Dataset
from src.data.split import Split
from src.utils.errors import InsufficientPointsError

logger = logging.getLogger(__name__)


@dataclass
class MinMaxScaler:
    mins: np.ndarray
    maxs: np.ndarray

    @classmethod
    def fit(cls, values: np.ndarray) -> "MinMaxScaler":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[1] == 0:
            return cls(mins=np.zeros(0), maxs=np.zeros(0))
        return cls(mins=values.min(axis=0), maxs=values.max(axis=0))

    @property
    def ranges(self) -> np.ndarray:
        return self.maxs - self.mins

    def transform(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        r = self.ranges
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, (values - self.mins) / safe, 0.0)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.ranges + self.mins

    def to_dict(self) -> Dict[str, Any]:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "MinMaxScaler":
        return cls(mins=np.asarray(d["mins"], dtype=np.float64), maxs=np.asarray(d["maxs"], dtype=np.float64))


@dataclass
class DatasetNormalizer:
    """Per-column scalers for coordinates, features and target."""

    coords: MinMaxScaler
    features: MinMaxScaler
    target: MinMaxScaler

    def apply(self, ds: Dataset) -> Dataset:
        return replace(
            ds,
            coords_unit=self.coords.transform(ds.coords),
            features=self.features.transform(ds.features) if ds.feature_dim else ds.features,
            target=self.target.transform(ds.target[:, None])[:, 0],
            feature_names=list(ds.feature_names),
            normalizer=self,
        )

    def inverse_target(self, values: np.ndarray) -> np.ndarray:
        return self.target.inverse(np.asarray(values)[:, None])[:, 0]

    def inverse_features(self, values: np.ndarray) -> np.ndarray:
        return self.features.inverse(values)

    def inverse_coords(self, values: np.ndarray) -> np.ndarray:
        return self.coords.inverse(values)

    def to_dict(self) -> Dict[str, Any]:
        return {"coords": self.coords.to_dict(), "features": self.features.to_dict(), "target": self.target.to_dict()}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "DatasetNormalizer":
        return cls(
            coords=MinMaxScaler.from_dict(d["coords"]),
            features=MinMaxScaler.from_dict(d["features"]),
            target=MinMaxScaler.from_dict(d["target"]),
        )


def fit_normalizer(ds: Dataset) -> DatasetNormalizer:
    if len(ds) == 0:
        raise InsufficientPointsError("Cannot fit normalization on an empty training split")
    return DatasetNormalizer(
        coords=MinMaxScaler.fit(ds.coords),
        features=MinMaxScaler.fit(ds.features),
        target=MinMaxScaler.fit(ds.target),
    )


def fit_apply_minmax(ds: Dataset, split: Split) -> Dataset:
    """Fit on ``split.train`` and normalize every point of ``ds`` with those parameters."""
    if len(split.train) == 0:
        raise InsufficientPointsError("Cannot fit normalization on an empty training split")
    normalizer = fit_normalizer(ds.subset(split.train))
    logger.debug(f"Fitted min-max normalizer on {len(split.train)} training points")
    return normalizer.apply(ds)
