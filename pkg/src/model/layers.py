"""
Trainable layers: dense projection, GCN propagation, GraphSAGE mean aggregation.

Weights start uniform in ±1/√fan_in and biases at zero, drawn from the
generator passed in so every layer is reproducible from the model seed.
"""

import logging
from typing import Dict

import numpy as np

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.geo.graph import SpatialGraph
from src.utils.errors import DimensionError

logger = logging.getLogger(__name__)


def uniform_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    """Base class: named parameters and gradient reset."""

    def parameters(self) -> Dict[str, Tensor]:
        raise NotImplementedError

    def zero_grad(self):
        for p in self.parameters().values():
            p.zero_grad()

    def _check_input(self, h: Tensor, in_dim: int):
        if h.values.ndim != 2 or h.shape[1] != in_dim:
            raise DimensionError(f"{type(self).__name__} expects (n, {in_dim}) input, got {h.shape}")


class Linear(Layer):
    """y = x·W + b."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.in_dim, self.out_dim = in_dim, out_dim
        self.weight = Tensor(uniform_init(rng, in_dim, (in_dim, out_dim)), requires_grad=True, name="weight")
        self.bias = Tensor(np.zeros(out_dim), requires_grad=True, name="bias")

    def parameters(self) -> Dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}

    def forward(self, x: Tensor) -> Tensor:
        self._check_input(x, self.in_dim)
        return ops.add_bias(ops.matmul(x, self.weight), self.bias)


class GcnLayer(Layer):
    """Ā·H·W + b; the caller applies the activation between layers."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.in_dim, self.out_dim = in_dim, out_dim
        self.weight = Tensor(uniform_init(rng, in_dim, (in_dim, out_dim)), requires_grad=True, name="weight")
        self.bias = Tensor(np.zeros(out_dim), requires_grad=True, name="bias")

    def parameters(self) -> Dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}

    def forward(self, h: Tensor, graph: SpatialGraph) -> Tensor:
        return gcn_layer_forward(h, graph.normalized_adjacency(), self)


class SageLayer(Layer):
    """H·W_self + mean_{j∈N(i)}(H_j)·W_neigh + b over out-neighbours."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.in_dim, self.out_dim = in_dim, out_dim
        self.weight_self = Tensor(uniform_init(rng, in_dim, (in_dim, out_dim)), requires_grad=True, name="weight_self")
        self.weight_neigh = Tensor(uniform_init(rng, in_dim, (in_dim, out_dim)), requires_grad=True, name="weight_neigh")
        self.bias = Tensor(np.zeros(out_dim), requires_grad=True, name="bias")

    def parameters(self) -> Dict[str, Tensor]:
        return {"weight_self": self.weight_self, "weight_neigh": self.weight_neigh, "bias": self.bias}

    def forward(self, h: Tensor, graph: SpatialGraph) -> Tensor:
        return sage_layer_forward(h, graph, self)


def gcn_layer_forward(h: Tensor, adj_norm, layer: GcnLayer) -> Tensor:
    layer._check_input(h, layer.in_dim)
    if adj_norm.shape != (h.shape[0], h.shape[0]):
        raise DimensionError(f"GCN adjacency {adj_norm.shape} does not match {h.shape[0]} nodes")
    propagated = ops.sparse_matmul(adj_norm, h)
    return ops.add_bias(ops.matmul(propagated, layer.weight), layer.bias)


def sage_layer_forward(h: Tensor, graph: SpatialGraph, layer: SageLayer) -> Tensor:
    layer._check_input(h, layer.in_dim)
    if graph.n != h.shape[0]:
        raise DimensionError(f"SAGE graph has {graph.n} nodes, features have {h.shape[0]} rows")
    neigh_mean = ops.sparse_matmul(graph.mean_operator(), h)
    combined = ops.add(ops.matmul(h, layer.weight_self), ops.matmul(neigh_mean, layer.weight_neigh))
    return ops.add_bias(combined, layer.bias)
