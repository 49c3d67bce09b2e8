"""
Local Moran's I of a scalar field under row-standardized spatial weights.

    I_i = (n - 1) · z_i / Σ_j z_j² · Σ_{j≠i} w_ij z_j,   z = y - ȳ (global mean)

A constant field has no variance to compare against; it yields all zeros and
the ``degenerate`` flag instead of an error so a constant batch cannot stop a
training run.
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp

from src.geo.graph import SpatialGraph, row_standardize
from src.utils.constants import MORAN_DEGENERATE_TOL
from src.utils.errors import ContractError, DimensionError, InsufficientPointsError

logger = logging.getLogger(__name__)

Weights = Union[np.ndarray, sp.spmatrix]


@dataclass(eq=False)
class MoranResult:
    values: np.ndarray
    weights_used: Weights
    degenerate: bool = False


def local_moran(y, w: Weights) -> MoranResult:
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = y.size
    if n < 2:
        raise InsufficientPointsError(f"local Moran's I needs at least 2 values, got {n}")
    if w.shape != (n, n):
        raise DimensionError(f"weights shape {w.shape} does not match {n} values")
    diagonal = w.diagonal() if sp.issparse(w) else np.diag(w)
    if np.any(diagonal != 0):
        raise ContractError("spatial weights must have a zero diagonal")

    z = y - y.mean()
    m2 = float(np.dot(z, z))
    if m2 < MORAN_DEGENERATE_TOL:
        logger.debug(f"Constant field over {n} points; Moran's I set to zero")
        return MoranResult(values=np.zeros(n), weights_used=w, degenerate=True)

    lag = np.asarray(w @ z).reshape(-1)
    values = (n - 1) * z / m2 * lag
    return MoranResult(values=values, weights_used=w)


def batch_moran_target(batch_y, batch_graph: SpatialGraph) -> np.ndarray:
    """
    Shuffled Moran's I for one training batch: row-standardize the batch's own
    graph and evaluate local Moran's I. Computed outside the autodiff tape.
    """
    batch_y = np.asarray(batch_y, dtype=np.float64).reshape(-1)
    if batch_graph.n != batch_y.size:
        raise DimensionError(f"batch graph has {batch_graph.n} nodes but {batch_y.size} targets")
    result = local_moran(batch_y, row_standardize(batch_graph))
    if result.degenerate:
        logger.warning(f"⚠️ Constant targets in a batch of {batch_y.size}; Moran targets are zero")
    return result.values
