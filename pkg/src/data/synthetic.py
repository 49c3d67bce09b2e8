"""
Synthetic spatially autocorrelated point fields for tests and acceptance runs.
"""

import logging
from typing import Sequence

import numpy as np

from src.data.dataset import Dataset
from src.utils.errors import InsufficientPointsError

logger = logging.getLogger(__name__)

DEFAULT_FREQUENCIES = (1.0, 2.0, 3.0)


def synthetic_field(coords, seed: int = 7, frequencies: Sequence[float] = DEFAULT_FREQUENCIES) -> np.ndarray:
    """
    Noise-free field value at each (lon, lat):

        y(c) = Σ_f sin(2π f·lon + φ_f) · sin(2π f·lat + ψ_f)

    Phases depend only on ``seed`` and the number of frequencies.
    """
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
    freqs = np.asarray(frequencies, dtype=np.float64)
    phase_rng = np.random.default_rng([seed, 0])
    phi = phase_rng.uniform(0.0, 2 * np.pi, size=freqs.size)
    psi = phase_rng.uniform(0.0, 2 * np.pi, size=freqs.size)
    lon, lat = coords[:, 0:1], coords[:, 1:2]
    return (np.sin(2 * np.pi * freqs * lon + phi) * np.sin(2 * np.pi * freqs * lat + psi)).sum(axis=1)


def synth_generate(
    n: int,
    seed: int = 7,
    frequencies: Sequence[float] = DEFAULT_FREQUENCIES,
    noise: float = 0.05,
) -> Dataset:
    """
    Uniform points in a 1°×1° patch (lon, lat ∈ [0, 1]) carrying
    ``synthetic_field`` plus ``noise`` · N(0, 1). There are no node features.
    """
    if n < 10:
        raise InsufficientPointsError(f"synth_generate needs n >= 10, got {n}")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, 1.0, size=(n, 2))
    eps = rng.standard_normal(n)
    y = synthetic_field(coords, seed, frequencies) + noise * eps
    logger.debug(f"Generated synthetic field: n={n}, seed={seed}, frequencies={list(frequencies)}")
    return Dataset(coords=coords, features=np.zeros((n, 0)), target=y)
