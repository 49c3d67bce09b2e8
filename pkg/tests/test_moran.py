import logging
import os
import sys

import numpy as np
import pytest
import scipy.sparse as sp

# Add project root to sys.path for absolute imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.geo.graph import SpatialGraph, knn_graph, row_standardize
from src.spatial_stats.moran import batch_moran_target, local_moran
from src.utils.errors import ContractError, DimensionError, InsufficientPointsError


def brute_force_moran(y, w):
    """Double-loop local Moran's I with the global mean."""
    n = len(y)
    y_bar = sum(y) / n
    m2 = sum((v - y_bar) ** 2 for v in y)
    out = []
    for i in range(n):
        lag = 0.0
        for j in range(n):
            if j != i:
                lag += w[i][j] * (y[j] - y_bar)
        out.append((n - 1) * (y[i] - y_bar) / m2 * lag)
    return out


def ring_weights(n):
    w = np.zeros((n, n))
    for i in range(n):
        w[i, (i - 1) % n] = 0.5
        w[i, (i + 1) % n] = 0.5
    return w


class TestLocalMoran:
    def test_constant_field_is_degenerate(self):
        result = local_moran(np.full(5, 3.0), ring_weights(5))
        assert result.degenerate
        assert np.all(result.values == 0.0)

    def test_antithetical_pair(self):
        result = local_moran(np.array([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(result.values, [-0.5, -0.5])
        assert not result.degenerate

    def test_alternating_ring(self):
        result = local_moran(np.array([1.0, -1.0, 1.0, -1.0]), ring_weights(4))
        assert np.allclose(result.values, -0.75)

    def test_accepts_sparse_weights(self):
        w = ring_weights(6)
        y = np.random.default_rng(0).normal(size=6)
        assert np.allclose(local_moran(y, sp.csr_matrix(w)).values, local_moran(y, w).values)

    def test_errors(self):
        with pytest.raises(InsufficientPointsError):
            local_moran(np.array([1.0]), np.zeros((1, 1)))
        with pytest.raises(DimensionError):
            local_moran(np.arange(3.0), np.zeros((4, 4)))
        with pytest.raises(ContractError):
            local_moran(np.arange(3.0), np.full((3, 3), 0.5))

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(3, 21))
            k = int(rng.integers(1, 5))
            coords = rng.uniform(0, 1, (n, 2))
            w = row_standardize(knn_graph(coords, k)).toarray()
            y = rng.normal(size=n)
            expected = np.array(brute_force_moran(y.tolist(), w.tolist()))
            got = local_moran(y, w).values
            assert np.allclose(got, expected, rtol=1e-10, atol=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(3)
        w = row_standardize(knn_graph(rng.uniform(0, 1, (25, 2)), 5))
        y = rng.normal(size=25)
        base = local_moran(y, w).values
        for _ in range(50):
            a = rng.uniform(0.1, 10.0) * rng.choice([-1.0, 1.0])
            b = rng.uniform(-100, 100)
            assert np.allclose(local_moran(a * y + b, w).values, base, rtol=0, atol=1e-9)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(4)
        w = row_standardize(knn_graph(rng.uniform(0, 1, (15, 2)), 3)).toarray()
        y = rng.normal(size=15)
        perm = rng.permutation(15)
        permuted = local_moran(y[perm], w[np.ix_(perm, perm)]).values
        assert np.allclose(permuted, local_moran(y, w).values[perm])

    def test_smooth_field_positive(self):
        coords = np.random.default_rng(5).uniform(0, 1, (200, 2))
        w = row_standardize(knn_graph(coords, 5))
        assert local_moran(coords[:, 1], w).values.mean() > 0

    def test_checkerboard_all_negative(self):
        lon, lat = np.meshgrid(np.arange(4) * 0.01, np.arange(4) * 0.01)
        coords = np.column_stack([lon.ravel(), lat.ravel()])
        y = np.array([(-1.0) ** (i + j) for j in range(4) for i in range(4)])
        w = row_standardize(knn_graph(coords, 2))
        assert np.all(local_moran(y, w).values < 0)


class TestBatchMoranTarget:
    def test_matches_local_moran_on_full_graph(self):
        rng = np.random.default_rng(6)
        coords = rng.uniform(0, 1, (40, 2))
        y = rng.normal(size=40)
        g = knn_graph(coords, 5)
        assert np.allclose(batch_moran_target(y, g), local_moran(y, row_standardize(g)).values)

    def test_antithetical_pair(self):
        g = knn_graph([(0.0, 0.0), (0.5, 0.5)], 1)
        assert np.allclose(batch_moran_target([1.0, -1.0], g), [-0.5, -0.5])

    def test_shared_point_differs_between_batches(self):
        rng = np.random.default_rng(7)
        coords = rng.uniform(0, 1, (300, 2))
        y = np.sin(4 * coords[:, 0]) + np.cos(3 * coords[:, 1]) + 0.1 * rng.normal(size=300)
        a = rng.choice(300, 60, replace=False)
        b = np.union1d(a[:30], rng.choice(np.setdiff1d(np.arange(300), a), 30, replace=False))
        ia = dict(zip(a.tolist(), batch_moran_target(y[a], knn_graph(coords[a], 5))))
        ib = dict(zip(b.tolist(), batch_moran_target(y[b], knn_graph(coords[b], 5))))
        shared = set(ia) & set(ib)
        assert shared
        assert any(abs(ia[p] - ib[p]) > 1e-6 for p in shared)

    def test_constant_batch_warns(self, caplog):
        g = knn_graph(np.random.default_rng(8).uniform(0, 1, (6, 2)), 2)
        with caplog.at_level(logging.WARNING, logger="src.spatial_stats.moran"):
            values = batch_moran_target(np.ones(6), g)
        assert np.all(values == 0.0)
        assert "Constant targets" in caplog.text

    def test_size_mismatch(self):
        g = SpatialGraph.from_edges(3, [(0, 1), (1, 0), (2, 0)])
        with pytest.raises(DimensionError):
            batch_moran_target(np.ones(4), g)
