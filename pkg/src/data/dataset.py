"""
Point datasets: coordinates, features and a scalar target, with CSV I/O.

CSV dialect: comma separated, '.' decimal, UTF-8, header on the first line.
Coordinates stay in raw lon/lat degrees (haversine graphs need them); the
min-max normalized copy used by the model lives in ``coords_unit``.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.utils.errors import CoordinateRangeError, DataLoadError, DimensionError, SchemaError
from src.utils.validators import invalid_coordinate_rows

logger = logging.getLogger(__name__)

MAX_REPORTED_ROWS = 10


@dataclass(frozen=True)
class GeoPoint:
    lon: float
    lat: float
    features: Tuple[float, ...]
    target: float


@dataclass(frozen=True)
class CsvSchema:
    lon_col: str = "lon"
    lat_col: str = "lat"
    target_col: str = "y"
    feature_cols: Tuple[str, ...] = ()

    def columns(self) -> List[str]:
        return [self.lon_col, self.lat_col, *self.feature_cols, self.target_col]


@dataclass
class LoadReport:
    """Row accounting for one CSV load: rows_in == rows_parsed + len(rejected)."""

    path: str
    rows_in: int = 0
    rows_parsed: int = 0
    rejected: List[Tuple[int, str]] = field(default_factory=list)   # (file line, reason)


@dataclass(eq=False)
class Dataset:
    coords: np.ndarray                       # (n, 2) lon/lat degrees
    features: np.ndarray                     # (n, p)
    target: np.ndarray                       # (n,)
    feature_names: List[str] = field(default_factory=list)
    target_name: str = "y"
    lon_name: str = "lon"
    lat_name: str = "lat"
    coords_unit: Optional[np.ndarray] = None  # (n, 2) min-max normalized coordinates
    normalizer: Optional[object] = None       # DatasetNormalizer once fitted
    load_report: Optional[LoadReport] = None

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64).reshape(-1, 2)
        n = self.coords.shape[0]
        self.target = np.asarray(self.target, dtype=np.float64).reshape(-1)
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            features = features.reshape(n, -1) if features.size else np.zeros((n, 0))
        self.features = features
        if self.target.shape[0] != n:
            raise DimensionError(f"{n} coordinates but {self.target.shape[0]} targets")
        if len(self.feature_names) != self.features.shape[1]:
            raise DimensionError(
                f"{self.features.shape[1]} feature columns but {len(self.feature_names)} feature names"
            )

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def model_coords(self) -> np.ndarray:
        """Coordinates as the model sees them (normalized when a normalizer was applied)."""
        return self.coords if self.coords_unit is None else self.coords_unit

    def points(self) -> Iterator[GeoPoint]:
        for i in range(len(self)):
            yield GeoPoint(
                lon=float(self.coords[i, 0]),
                lat=float(self.coords[i, 1]),
                features=tuple(float(v) for v in self.features[i]),
                target=float(self.target[i]),
            )

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return replace(
            self,
            coords=self.coords[idx],
            features=self.features[idx],
            target=self.target[idx],
            feature_names=list(self.feature_names),
            coords_unit=None if self.coords_unit is None else self.coords_unit[idx],
            load_report=None,
        )

    def to_frame(self) -> pd.DataFrame:
        data = {self.lon_name: self.coords[:, 0], self.lat_name: self.coords[:, 1]}
        for j, name in enumerate(self.feature_names):
            data[name] = self.features[:, j]
        data[self.target_name] = self.target
        return pd.DataFrame(data)


# ═══════════════════════════════════════════════════════════════════════
# CSV I/O
# ═══════════════════════════════════════════════════════════════════════


def _format_offenders(rejected: List[Tuple[int, str]]) -> str:
    shown = "; ".join(f"line {line}: {reason}" for line, reason in rejected[:MAX_REPORTED_ROWS])
    more = len(rejected) - MAX_REPORTED_ROWS
    return shown + (f"; ... and {more} more" if more > 0 else "")


def load_csv(path: str, schema: Optional[CsvSchema] = None, strict: bool = True) -> Dataset:
    """
    Load a point dataset from CSV.

    Rows with missing or non-numeric declared fields, or coordinates outside
    the degree ranges, are rejected. In strict mode any rejection raises
    (listing the first 10 offenders); otherwise they are dropped, logged and
    kept in ``Dataset.load_report``.
    """
    schema = schema or CsvSchema()
    if not os.path.exists(path):
        raise FileNotFoundError(f"Dataset not found: {path}")

    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataLoadError(f"Cannot parse {path}: {e}") from e

    missing = [c for c in schema.columns() if c not in raw.columns]
    if missing:
        raise SchemaError(f"{path}: missing declared column(s) {missing}; header has {list(raw.columns)}")

    # blank lines stay in the frame so index i is file line i + 2
    raw = raw.fillna("")
    blank = np.array([all(not str(v).strip() for v in row) for row in raw.itertuples(index=False)], dtype=bool)

    cols = schema.columns()
    numeric = raw[cols].apply(lambda s: pd.to_numeric(s.str.strip(), errors="coerce"))
    values = numeric.to_numpy(dtype=np.float64)

    report = LoadReport(path=path, rows_in=len(raw))
    bad_numeric = ~np.isfinite(values).all(axis=1)
    for i in np.flatnonzero(bad_numeric):
        if blank[i]:
            report.rejected.append((int(i) + 2, "blank line"))
            continue
        fields = [c for c, v in zip(cols, values[i]) if not np.isfinite(v)]
        report.rejected.append((int(i) + 2, f"missing or non-numeric {fields}"))

    coords = values[:, :2]
    out_of_range = np.zeros(len(raw), dtype=bool)
    candidates = np.flatnonzero(~bad_numeric)
    bad_range = candidates[invalid_coordinate_rows(coords[candidates])] if candidates.size else candidates
    out_of_range[bad_range] = True
    for i in bad_range:
        report.rejected.append((int(i) + 2, f"coordinate out of range (lon={coords[i, 0]}, lat={coords[i, 1]})"))
    report.rejected.sort()

    if report.rejected:
        message = f"{path}: {len(report.rejected)} invalid row(s): {_format_offenders(report.rejected)}"
        if strict:
            if not bad_numeric.any():
                raise CoordinateRangeError(message)
            raise DataLoadError(message)
        logger.warning(f"⚠️ {message}; dropped (strict=False)")

    keep = ~(bad_numeric | out_of_range)
    report.rows_parsed = int(keep.sum())
    p = len(schema.feature_cols)
    ds = Dataset(
        coords=coords[keep],
        features=values[keep, 2:2 + p],
        target=values[keep, 2 + p],
        feature_names=list(schema.feature_cols),
        target_name=schema.target_col,
        lon_name=schema.lon_col,
        lat_name=schema.lat_col,
        load_report=report,
    )
    logger.info(f"📥 Loaded {len(ds)} points ({ds.feature_dim} features) from {path}")
    return ds


def save_csv(ds: Dataset, path: str) -> str:
    """Write raw coordinates, features and target with full float precision."""
    if len(ds) == 0:
        raise ValueError("Cannot save an empty dataset")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    ds.to_frame().to_csv(path, index=False, float_format="%.17g")
    logger.info(f"💾 Saved {len(ds)} points → {path}")
    return path
