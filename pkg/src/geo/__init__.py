# Coordinate geometry and spatial graphs
from .distance import haversine_km, pairwise_haversine_km
from .graph import SpatialGraph, knn_graph, normalize_adjacency, row_standardize
