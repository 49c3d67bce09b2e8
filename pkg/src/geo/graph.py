"""
k-nearest-neighbour spatial graphs and the sparse matrices derived from them.

Design decisions:
- Edges are directed (i → its k nearest) and never symmetrized.
- Distance ties resolve to the lower point index.
- Ā uses the degree of (A + I), so isolated nodes still get a self-loop weight of 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.geo.distance import pairwise_haversine_km
from src.utils.constants import MIN_EDGE_DISTANCE_KM, EdgeWeighting
from src.utils.errors import InsufficientPointsError, ParameterError
from src.utils.validators import validate_coordinates

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SpatialGraph:
    """Directed kNN graph over n points with per-edge haversine distances."""

    n: int
    src: np.ndarray                 # edge i → j: source indices
    dst: np.ndarray                 # edge i → j: target indices
    distances_km: np.ndarray
    k: int = 0
    edge_weighting: str = EdgeWeighting.BINARY
    _normalized: Optional[sp.csr_matrix] = field(default=None, repr=False, compare=False)

    @property
    def num_edges(self) -> int:
        return int(self.src.size)

    def edge_weights(self) -> np.ndarray:
        if self.edge_weighting == EdgeWeighting.INVERSE_DISTANCE:
            return 1.0 / np.maximum(self.distances_km, MIN_EDGE_DISTANCE_KM)
        return np.ones(self.num_edges)

    def adjacency(self, binary: bool = False) -> sp.csr_matrix:
        """A as a sparse n×n matrix (a_ij = edge weight, or 1 when ``binary``)."""
        weights = np.ones(self.num_edges) if binary else self.edge_weights()
        return sp.csr_matrix((weights, (self.src, self.dst)), shape=(self.n, self.n))

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n)

    def normalized_adjacency(self) -> sp.csr_matrix:
        if self._normalized is None:
            self._normalized = normalize_adjacency(self)
        return self._normalized

    def mean_operator(self) -> sp.csr_matrix:
        """Row-normalized binary adjacency: (M·H)_i is the mean of H over i's out-neighbours."""
        return _row_normalize(self.adjacency(binary=True))

    @classmethod
    def from_edges(cls, n: int, edges, distances_km=None, **kwargs) -> "SpatialGraph":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        dist = np.ones(len(edges)) if distances_km is None else np.asarray(distances_km, dtype=np.float64)
        return cls(n=n, src=edges[:, 0].copy(), dst=edges[:, 1].copy(), distances_km=dist, **kwargs)


def knn_graph(coords, k: int, edge_weighting: str = EdgeWeighting.BINARY) -> SpatialGraph:
    """
    Connect each point to its k nearest neighbours by haversine distance.

    Args:
        coords: (n, 2) lon/lat degrees
        k: neighbours per point; clamped to n-1 with a warning when k >= n
        edge_weighting: "binary" or "inverse_distance"
    """
    coords = validate_coordinates(coords)
    n = coords.shape[0]
    if n < 2:
        raise InsufficientPointsError(f"knn_graph needs at least 2 points, got {n}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if edge_weighting not in (EdgeWeighting.BINARY, EdgeWeighting.INVERSE_DISTANCE):
        raise ParameterError(f"Unknown edge weighting: {edge_weighting!r}")
    if k >= n:
        logger.warning(f"⚠️ k={k} >= n={n}; clamping to k={n - 1}")
        k = n - 1

    dist = pairwise_haversine_km(coords, coords)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps ascending index order among equal distances
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]

    src = np.repeat(np.arange(n), k)
    dst = order.reshape(-1)
    return SpatialGraph(
        n=n,
        src=src,
        dst=dst,
        distances_km=dist[src, dst],
        k=k,
        edge_weighting=edge_weighting,
    )


def normalize_adjacency(g: SpatialGraph) -> sp.csr_matrix:
    """Ā = D^{-1/2} (A + I) D^{-1/2} with D the row sums of A + I."""
    a_hat = g.adjacency() + sp.identity(g.n, format="csr")
    degree = np.asarray(a_hat.sum(axis=1)).reshape(-1)
    d_inv_sqrt = sp.diags(1.0 / np.sqrt(degree))
    return sp.csr_matrix(d_inv_sqrt @ a_hat @ d_inv_sqrt)


def _row_normalize(a: sp.csr_matrix) -> sp.csr_matrix:
    row_sums = np.asarray(a.sum(axis=1)).reshape(-1)
    inv = np.zeros_like(row_sums)
    nonzero = row_sums > 0
    inv[nonzero] = 1.0 / row_sums[nonzero]
    return sp.csr_matrix(sp.diags(inv) @ a)


def row_standardize(g: SpatialGraph) -> sp.csr_matrix:
    """Spatial weights W with w_ij = a_ij / Σ_j a_ij; rows without neighbours stay zero."""
    return _row_normalize(g.adjacency())
