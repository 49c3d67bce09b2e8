"""
Positional encoder PE = NN(ST(C)): the fixed sinusoidal transform followed by a
single learnable projection with sigmoid activation.
"""

import logging
from typing import Dict

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.encoder.sinusoidal import SPATIAL_DIMS, SinusoidalConfig, sinusoidal_transform
from src.model.layers import Linear
from src.utils.errors import DimensionError

logger = logging.getLogger(__name__)


class PositionalEncoder:
    """Learnable coordinate embedding of width ``emb_dim``."""

    def __init__(self, config: SinusoidalConfig, emb_dim: int, rng: np.random.Generator):
        self.config = config
        self.emb_dim = emb_dim
        self.projection = Linear(config.output_dim, emb_dim, rng)

    def parameters(self) -> Dict[str, Tensor]:
        return {f"projection.{k}": v for k, v in self.projection.parameters().items()}

    def forward(self, coords: np.ndarray, training: bool = False) -> Tensor:
        return pe_forward(coords, self, training)


def pe_forward(coords: np.ndarray, enc: PositionalEncoder, training: bool = False) -> Tensor:
    """
    C_emb = sigmoid(ST(coords)·W_PE + b_PE), shape (n, emb_dim).

    ``training`` is accepted for interface symmetry; the encoder has no
    stochastic parts.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != SPATIAL_DIMS:
        raise DimensionError(f"pe_forward needs (n, 2) coordinates, got {coords.shape}")
    st = Tensor(sinusoidal_transform(coords, enc.config))
    return ops.sigmoid(enc.projection.forward(st))
