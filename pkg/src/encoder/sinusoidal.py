"""
Multi-scale sinusoidal transform of 2-d coordinates.

Row layout: for each scale s, for each dimension v, [cos(c_v/σ_s), sin(c_v/σ_s)].
The order is fixed so checkpoints stay portable.
"""

from dataclasses import dataclass

import numpy as np

from src.utils.errors import ConfigError, DimensionError

SPATIAL_DIMS = 2


@dataclass(frozen=True)
class SinusoidalConfig:
    """Grid scales σ_s = sigma_min · g^{s/(S-1)}, g = sigma_max / sigma_min."""

    sigma_min: float = 0.01
    sigma_max: float = 1.0
    num_scales: int = 16

    def __post_init__(self):
        if self.num_scales < 2:
            raise ConfigError(
                f"S must be >= 2: the scale exponent s/(S-1) is undefined for S={self.num_scales}"
            )
        if not 0 < self.sigma_min < self.sigma_max:
            raise ConfigError(
                f"Need 0 < sigma_min < sigma_max, got sigma_min={self.sigma_min}, sigma_max={self.sigma_max}"
            )

    @property
    def ratio(self) -> float:
        return self.sigma_max / self.sigma_min

    @property
    def output_dim(self) -> int:
        return 2 * SPATIAL_DIMS * self.num_scales

    def scales(self) -> np.ndarray:
        s = np.arange(self.num_scales)
        return self.sigma_min * self.ratio ** (s / (self.num_scales - 1))


def sinusoidal_transform(coords: np.ndarray, cfg: SinusoidalConfig) -> np.ndarray:
    """Map (n, 2) coordinates to the (n, 4S) sinusoidal features."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != SPATIAL_DIMS:
        raise DimensionError(f"sinusoidal_transform needs (n, 2) coordinates, got {coords.shape}")
    phase = coords[:, None, :] / cfg.scales()[None, :, None]          # (n, S, 2)
    features = np.stack([np.cos(phase), np.sin(phase)], axis=-1)        # (n, S, 2, 2)
    return features.reshape(coords.shape[0], cfg.output_dim)
