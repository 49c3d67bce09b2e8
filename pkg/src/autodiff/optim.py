"""
Adam optimizer over named parameter tensors.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from src.autodiff.tensor import Tensor
from src.utils.errors import ContractError, ParameterError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moments per parameter name plus the step counter."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.lr <= 0:
            raise ParameterError(f"Adam lr must be positive, got {self.lr}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ParameterError(f"Adam betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")
        if self.eps <= 0:
            raise ParameterError(f"Adam eps must be positive, got {self.eps}")

    @classmethod
    def for_parameters(cls, params: Mapping[str, Tensor], lr: float = 1e-3, **kwargs) -> "AdamState":
        state = cls(lr=lr, **kwargs)
        for name, p in params.items():
            state.m[name] = np.zeros_like(p.values)
            state.v[name] = np.zeros_like(p.values)
        return state


def adam_step(params: Mapping[str, Tensor], state: AdamState):
    """
    One bias-corrected Adam update; increments ``state.t`` and zeroes grads afterwards.
    """
    for name, p in params.items():
        if p.grad is None:
            raise ContractError(f"Parameter '{name}' has no gradient; run reverse_accumulate first")
        if name not in state.m:
            state.m[name] = np.zeros_like(p.values)
            state.v[name] = np.zeros_like(p.values)
        if state.m[name].shape != p.shape:
            raise ContractError(f"Adam state for '{name}' has shape {state.m[name].shape}, parameter {p.shape}")

    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t

    for name, p in params.items():
        g = p.grad
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p.values -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        p.grad = np.zeros_like(p.values)
