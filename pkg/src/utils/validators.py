"""
Input validation helpers for coordinates and probabilities.
"""

import logging

import numpy as np

from src.utils.constants import LAT_RANGE, LON_RANGE
from src.utils.errors import CoordinateRangeError, ParameterError

logger = logging.getLogger(__name__)


def invalid_coordinate_rows(coords: np.ndarray) -> np.ndarray:
    """Indices of rows whose (lon, lat) lie outside the degree ranges or are not finite."""
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
    lon, lat = coords[:, 0], coords[:, 1]
    bad = ~np.isfinite(lon) | ~np.isfinite(lat)
    bad |= (lon < LON_RANGE[0]) | (lon > LON_RANGE[1])
    bad |= (lat < LAT_RANGE[0]) | (lat > LAT_RANGE[1])
    return np.flatnonzero(bad)


def validate_coordinates(coords: np.ndarray) -> np.ndarray:
    """
    Check an (n, 2) array of lon/lat degrees and return it as float64.
    Raises CoordinateRangeError naming the first offending row.
    """
    arr = np.asarray(coords, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.shape[-1] != 2:
        raise CoordinateRangeError(f"Coordinates must have 2 columns (lon, lat), got shape {arr.shape}")
    bad = invalid_coordinate_rows(arr)
    if bad.size:
        row = int(bad[0])
        raise CoordinateRangeError(
            f"Coordinate out of range at row {row}: lon={arr[row, 0]}, lat={arr[row, 1]} "
            f"(lon must be in {LON_RANGE}, lat in {LAT_RANGE}); {bad.size} bad row(s) total"
        )
    return arr


def validate_probability(p: float, name: str = "p") -> float:
    """Probability in [0, 1)."""
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"{name} must satisfy 0 <= {name} < 1, got {p}")
    return float(p)
