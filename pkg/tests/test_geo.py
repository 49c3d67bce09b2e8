import logging
import math
import os
import sys

import numpy as np
import pytest

# Add project root to sys.path for absolute imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.geo.distance import haversine_km, pairwise_haversine_km
from src.geo.graph import SpatialGraph, knn_graph, normalize_adjacency, row_standardize
from src.utils.constants import EARTH_RADIUS_KM, EdgeWeighting
from src.utils.errors import CoordinateRangeError, InsufficientPointsError, ParameterError


def random_coords(n, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack([rng.uniform(-180, 180, n), rng.uniform(-80, 80, n)])


def edge_set(g):
    return set(zip(g.src.tolist(), g.dst.tolist()))


class TestHaversine:
    def test_identical_points(self):
        assert haversine_km((12.5, 41.9), (12.5, 41.9)) == 0.0

    def test_quarter_circle(self):
        assert haversine_km((0, 0), (90, 0)) == pytest.approx(math.pi * EARTH_RADIUS_KM / 2, abs=0.01)
        assert haversine_km((0, 0), (90, 0)) == pytest.approx(10007.54, abs=0.01)

    def test_antipodal(self):
        assert haversine_km((0, 0), (180, 0)) == pytest.approx(20015.09, abs=0.01)

    def test_out_of_range(self):
        with pytest.raises(CoordinateRangeError):
            haversine_km((0, 95), (0, 0))
        with pytest.raises(CoordinateRangeError):
            haversine_km((-181, 0), (0, 0))

    def test_symmetry_and_triangle_inequality(self):
        pts = random_coords(60, seed=4)
        d = pairwise_haversine_km(pts, pts)
        assert np.allclose(d, d.T, atol=1e-9)
        for i, j, k in np.random.default_rng(5).integers(0, 60, size=(200, 3)):
            assert d[i, k] <= d[i, j] + d[j, k] + 1e-9


class TestKnnGraph:
    def test_equator_hand_example(self):
        g = knn_graph([(0, 0), (1, 0), (10, 0)], k=1)
        assert edge_set(g) == {(0, 1), (1, 0), (2, 1)}

    def test_saturated_complete_digraph(self):
        g = knn_graph(random_coords(5), k=4)
        assert g.num_edges == 20
        assert all(i != j for i, j in edge_set(g))

    def test_tie_breaks_to_lower_index(self):
        coords = [(0, 0), (5, 5), (1, 1), (1, 1), (1.2, 1.2)]
        g = knn_graph(coords, k=1)
        assert (4, 2) in edge_set(g)

    def test_out_degree_is_min_k_n_minus_one(self):
        for n, k in [(10, 3), (6, 5), (30, 5)]:
            g = knn_graph(random_coords(n, seed=n), k)
            assert np.all(g.out_degree() == min(k, n - 1))
            assert np.all(g.src != g.dst)

    def test_k_clamped_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger="src.geo.graph"):
            g = knn_graph(random_coords(4), k=10)
        assert g.k == 3
        assert np.all(g.out_degree() == 3)
        assert "clamping" in caplog.text

    def test_too_few_points(self):
        with pytest.raises(InsufficientPointsError):
            knn_graph([(0, 0)], k=1)

    def test_invalid_k_and_weighting(self):
        with pytest.raises(ParameterError):
            knn_graph(random_coords(5), k=0)
        with pytest.raises(ParameterError):
            knn_graph(random_coords(5), k=2, edge_weighting="gaussian")

    def test_distances_match_haversine(self):
        pts = random_coords(12, seed=2)
        g = knn_graph(pts, k=3)
        for i, j, d in zip(g.src, g.dst, g.distances_km):
            assert d == pytest.approx(haversine_km(pts[i], pts[j]))

    def test_inverse_distance_weights(self):
        g = knn_graph([(0, 0), (1, 0), (10, 0)], k=1, edge_weighting=EdgeWeighting.INVERSE_DISTANCE)
        a = g.adjacency().toarray()
        assert a[0, 1] == pytest.approx(1.0 / haversine_km((0, 0), (1, 0)))
        assert np.array_equal(g.adjacency(binary=True).toarray() > 0, a > 0)

    def test_permutation_equivariance(self):
        pts = random_coords(15, seed=9)
        perm = np.random.default_rng(1).permutation(15)
        a = knn_graph(pts, 3).adjacency().toarray()
        a_perm = knn_graph(pts[perm], 3).adjacency().toarray()
        assert np.array_equal(a_perm, a[np.ix_(perm, perm)])


class TestNormalizeAdjacency:
    def test_isolated_node(self):
        g = SpatialGraph.from_edges(1, np.zeros((0, 2)))
        assert normalize_adjacency(g).toarray().tolist() == [[1.0]]

    def test_mutual_pair(self):
        g = SpatialGraph.from_edges(2, [(0, 1), (1, 0)])
        assert np.allclose(normalize_adjacency(g).toarray(), [[0.5, 0.5], [0.5, 0.5]])

    def test_empty_adjacency_is_identity(self):
        g = SpatialGraph.from_edges(2, np.zeros((0, 2)))
        assert np.array_equal(normalize_adjacency(g).toarray(), np.eye(2))

    def test_symmetric_input_gives_symmetric_output(self):
        edges = [(0, 1), (1, 0), (1, 2), (2, 1), (0, 3), (3, 0)]
        a_bar = normalize_adjacency(SpatialGraph.from_edges(4, edges)).toarray()
        assert np.allclose(a_bar, a_bar.T, atol=1e-12)
        assert np.all((a_bar >= 0) & (a_bar <= 1))

    def test_knn_entries_in_unit_interval(self):
        a_bar = knn_graph(random_coords(40, seed=3), 5).normalized_adjacency().toarray()
        assert np.all((a_bar >= 0) & (a_bar <= 1))


class TestRowStandardize:
    def test_two_neighbours(self):
        w = row_standardize(SpatialGraph.from_edges(3, [(0, 1), (0, 2)])).toarray()
        assert w[0].tolist() == [0.0, 0.5, 0.5]

    def test_isolated_row_stays_zero(self):
        w = row_standardize(SpatialGraph.from_edges(3, [(0, 1)])).toarray()
        assert np.all(w[2] == 0.0)

    def test_knn_rows_sum_to_one(self):
        for seed in range(5):
            w = row_standardize(knn_graph(random_coords(50, seed=seed), 5))
            assert np.allclose(np.asarray(w.sum(axis=1)).reshape(-1), 1.0, atol=1e-12)

    def test_inverse_distance_rows_sum_to_one(self):
        g = knn_graph(random_coords(30, seed=8), 4, edge_weighting=EdgeWeighting.INVERSE_DISTANCE)
        assert np.allclose(np.asarray(row_standardize(g).sum(axis=1)).reshape(-1), 1.0)
