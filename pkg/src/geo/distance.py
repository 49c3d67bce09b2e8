"""
Great-circle distances between lon/lat points.
"""

import numpy as np

from src.utils.constants import EARTH_RADIUS_KM
from src.utils.validators import validate_coordinates


def haversine_km(c1, c2) -> float:
    """Great-circle distance in km between two (lon, lat) degree pairs."""
    a = validate_coordinates(c1)[0]
    b = validate_coordinates(c2)[0]
    return float(pairwise_haversine_km(a[None, :], b[None, :])[0, 0])


def pairwise_haversine_km(coords_a: np.ndarray, coords_b: np.ndarray) -> np.ndarray:
    """
    Distance matrix between two sets of (lon, lat) degrees, shape (len(a), len(b)).
    Inputs are assumed already validated.
    """
    lon_a, lat_a = np.radians(coords_a[:, 0])[:, None], np.radians(coords_a[:, 1])[:, None]
    lon_b, lat_b = np.radians(coords_b[:, 0])[None, :], np.radians(coords_b[:, 1])[None, :]
    dlat = lat_b - lat_a
    dlon = lon_b - lon_a
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat_a) * np.cos(lat_b) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
