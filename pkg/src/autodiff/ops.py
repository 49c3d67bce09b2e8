"""
Differentiable primitives over Tensor.

Each primitive computes its forward value with numpy and registers the local
gradient rule on the active tape. Broadcasting is limited to what the model
needs: row-wise bias addition and scalar scaling.
"""

import logging
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from src.autodiff.tensor import Tensor, record
from src.utils.constants import Activation
from src.utils.errors import DimensionError, ParameterError
from src.utils.validators import validate_probability

logger = logging.getLogger(__name__)

ArrayLike = Union[Tensor, np.ndarray, float]


def as_tensor(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# ═══════════════════════════════════════════════════════════════════════
# LINEAR ALGEBRA
# ═══════════════════════════════════════════════════════════════════════

def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Matrix product a[m×k] · b[k×n]."""
    a, b = as_tensor(a), as_tensor(b)
    if a.values.ndim != 2 or b.values.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} · {b.shape}")
    av, bv = a.values, b.values
    out = Tensor(av @ bv)

    def backward(g):
        return g @ bv.T, av.T @ g

    return record("matmul", out, (a, b), backward)


def sparse_matmul(matrix: sp.spmatrix, x: ArrayLike) -> Tensor:
    """Constant sparse matrix times a dense tensor; gradient flows only to x."""
    x = as_tensor(x)
    if x.values.ndim != 2 or matrix.shape[1] != x.shape[0]:
        raise DimensionError(f"sparse_matmul shape mismatch: {matrix.shape} · {x.shape}")
    csr = sp.csr_matrix(matrix)
    out = Tensor(np.asarray(csr @ x.values))

    def backward(g):
        return (np.asarray(csr.T @ g),)

    return record("sparse_matmul", out, (x,), backward)


def add_bias(x: ArrayLike, bias: ArrayLike) -> Tensor:
    """x[n×d] + bias[d], bias broadcast over rows."""
    x, bias = as_tensor(x), as_tensor(bias)
    if x.values.ndim != 2 or bias.shape != (x.shape[1],):
        raise DimensionError(f"add_bias shape mismatch: {x.shape} + {bias.shape}")
    out = Tensor(x.values + bias.values)

    def backward(g):
        return g, g.sum(axis=0)

    return record("add_bias", out, (x, bias), backward)


def concat_cols(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Columns of a followed by columns of b."""
    a, b = as_tensor(a), as_tensor(b)
    if a.values.ndim != 2 or b.values.ndim != 2 or a.shape[0] != b.shape[0]:
        raise DimensionError(f"concat_cols row mismatch: {a.shape} | {b.shape}")
    split = a.shape[1]
    out = Tensor(np.concatenate([a.values, b.values], axis=1))

    def backward(g):
        return g[:, :split], g[:, split:]

    return record("concat_cols", out, (a, b), backward)


def flatten(x: ArrayLike) -> Tensor:
    """Reshape to a vector (used on n×1 head outputs)."""
    x = as_tensor(x)
    shape = x.shape
    out = Tensor(x.values.reshape(-1))

    def backward(g):
        return (g.reshape(shape),)

    return record("flatten", out, (x,), backward)


# ═══════════════════════════════════════════════════════════════════════
# ELEMENTWISE
# ═══════════════════════════════════════════════════════════════════════

def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"add shape mismatch: {a.shape} + {b.shape}")
    out = Tensor(a.values + b.values)
    return record("add", out, (a, b), lambda g: (g, g))


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"mul shape mismatch: {a.shape} * {b.shape}")
    av, bv = a.values, b.values
    out = Tensor(av * bv)
    return record("mul", out, (a, b), lambda g: (g * bv, g * av))


def scale(x: ArrayLike, factor: float) -> Tensor:
    x = as_tensor(x)
    factor = float(factor)
    out = Tensor(x.values * factor)
    return record("scale", out, (x,), lambda g: (g * factor,))


def exp(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    y = np.exp(x.values)
    out = Tensor(y)
    return record("exp", out, (x,), lambda g: (g * y,))


def sin(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    xv = x.values
    out = Tensor(np.sin(xv))
    return record("sin", out, (x,), lambda g: (g * np.cos(xv),))


def activation(x: ArrayLike, kind: str) -> Tensor:
    """Elementwise relu or sigmoid."""
    x = as_tensor(x)
    if kind == Activation.RELU:
        mask = x.values > 0
        out = Tensor(np.where(mask, x.values, 0.0))
        return record("relu", out, (x,), lambda g: (g * mask,))
    if kind == Activation.SIGMOID:
        y = expit(x.values)
        out = Tensor(y)
        return record("sigmoid", out, (x,), lambda g: (g * y * (1.0 - y),))
    raise ParameterError(f"Unknown activation: {kind!r}")


def relu(x: ArrayLike) -> Tensor:
    return activation(x, Activation.RELU)


def sigmoid(x: ArrayLike) -> Tensor:
    return activation(x, Activation.SIGMOID)


def dropout(x: ArrayLike, p: float, training: bool, rng: Optional[np.random.Generator]) -> Tensor:
    """
    Inverted dropout: zero each entry with probability p, scale survivors by 1/(1-p).
    Identity when not training or p == 0.
    """
    x = as_tensor(x)
    p = validate_probability(p, "dropout p")
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ParameterError("dropout in training mode needs a seeded generator")
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    out = Tensor(x.values * keep)
    return record("dropout", out, (x,), lambda g: (g * keep,))


# ═══════════════════════════════════════════════════════════════════════
# REDUCTIONS & LOSSES
# ═══════════════════════════════════════════════════════════════════════

def sum_all(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    shape = x.shape
    out = Tensor(x.values.sum())
    return record("sum", out, (x,), lambda g: (np.broadcast_to(g, shape).copy(),))


def mse_loss(pred: ArrayLike, target: ArrayLike) -> Tensor:
    """(1/n) Σ (pred - target)²; gradient flows to both sides when they require it."""
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape or pred.values.ndim != 1:
        raise DimensionError(f"mse_loss needs equal-length vectors, got {pred.shape} and {target.shape}")
    n = pred.shape[0]
    if n == 0:
        raise DimensionError("mse_loss on empty input")
    diff = pred.values - target.values
    out = Tensor(np.dot(diff, diff) / n)

    def backward(g):
        d = (2.0 / n) * diff * g
        return d, -d

    return record("mse", out, (pred, target), backward)
