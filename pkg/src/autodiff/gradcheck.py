"""
Central finite-difference check of tape gradients.
"""

import logging
import math
from typing import Callable, Mapping

import numpy as np

from src.autodiff.tensor import ComputationTape, Tensor, reverse_accumulate
from src.utils.constants import GRADCHECK_DENOM_FLOOR
from src.utils.errors import EvaluationError, ParameterError

logger = logging.getLogger(__name__)


def _evaluate(f: Callable[[], Tensor]) -> float:
    value = f().item()
    if not math.isfinite(value):
        raise EvaluationError(f"objective evaluated to {value}")
    return value


def finite_difference_check(
    f: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    denom_floor: float = GRADCHECK_DENOM_FLOOR,
) -> float:
    """
    Compare tape gradients of the scalar objective ``f`` against central differences.

    ``f`` takes no arguments and reads ``params`` by closure; it must be
    deterministic (dropout off). Returns the worst relative error
    |analytic - numeric| / max(|analytic|, |numeric|, denom_floor).
    """
    if h <= 0:
        raise ParameterError(f"finite-difference step must be positive, got {h}")

    for p in params.values():
        p.zero_grad()
    with ComputationTape():
        loss = f()
    if not math.isfinite(loss.item()):
        raise EvaluationError(f"objective evaluated to {loss.item()}")
    reverse_accumulate(loss)
    analytic = {name: p.grad.copy() for name, p in params.items()}

    worst = 0.0
    worst_at = ""
    for name, p in params.items():
        flat = p.values.reshape(-1)
        grad = analytic[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            f_plus = _evaluate(f)
            flat[i] = original - h
            f_minus = _evaluate(f)
            flat[i] = original
            numeric = (f_plus - f_minus) / (2.0 * h)
            denom = max(abs(grad[i]), abs(numeric), denom_floor)
            err = abs(grad[i] - numeric) / denom
            if err > worst:
                worst, worst_at = err, f"{name}[{i}]"

    for p in params.values():
        p.zero_grad()
    logger.debug(f"Gradient check: max relative error {worst:.3e} at {worst_at or '-'}")
    return worst
