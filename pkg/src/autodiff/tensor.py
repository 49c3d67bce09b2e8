"""
Dense float64 tensors and the computation tape that records how they were made.

Usage:
    w = Tensor(np.zeros((3, 1)), requires_grad=True)
    with ComputationTape():
        loss = ops.mse_loss(ops.flatten(ops.matmul(x, w)), y)
    reverse_accumulate(loss)
    w.grad  # d loss / d w

Operations executed outside an active tape are not recorded; that is how
evaluation runs without paying for gradient bookkeeping.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import ContractError

logger = logging.getLogger(__name__)

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """A float64 array with an optional gradient slot."""

    __slots__ = ("values", "grad", "requires_grad", "name", "_tape")

    def __init__(self, values, requires_grad: bool = False, name: str = ""):
        self.values = np.array(values, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._tape: Optional["ComputationTape"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        if self.values.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.values.reshape(()))

    def zero_grad(self):
        self.grad = np.zeros_like(self.values)

    def __repr__(self):
        label = f" '{self.name}'" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


@dataclass
class TapeEntry:
    """One recorded primitive: output, its inputs, and the local gradient rule."""

    op: str
    output: Tensor
    inputs: Tuple[Tensor, ...]
    backward: BackwardFn


_local = threading.local()


def _tape_stack() -> List["ComputationTape"]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_tape() -> Optional["ComputationTape"]:
    stack = _tape_stack()
    return stack[-1] if stack else None


class ComputationTape:
    """
    Ordered record of primitive operations.

    Entries are appended as operations execute, so the record is already in
    topological order. Tapes are thread-local: each training thread owns its own.
    """

    def __init__(self):
        self.entries: List[TapeEntry] = []

    def __enter__(self) -> "ComputationTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def __len__(self):
        return len(self.entries)

    def record(self, op: str, output: Tensor, inputs: Sequence[Tensor], backward: BackwardFn):
        output._tape = self
        self.entries.append(TapeEntry(op, output, tuple(inputs), backward))


def record(op: str, output: Tensor, inputs: Sequence[Tensor], backward: BackwardFn) -> Tensor:
    """Attach ``output`` to the active tape if any input needs a gradient."""
    if any(t.requires_grad for t in inputs):
        output.requires_grad = True
        tape = active_tape()
        if tape is not None:
            tape.record(op, output, inputs, backward)
    return output


def reverse_accumulate(loss: Tensor):
    """
    Reverse sweep from a scalar loss.

    Every requires_grad tensor reachable from ``loss`` has d loss / d tensor
    added to its ``grad``; calling twice without a reset accumulates.
    """
    if loss.values.size != 1:
        raise ContractError(f"reverse_accumulate needs a scalar loss, got shape {loss.shape}")
    tape = loss._tape
    if tape is None:
        raise ContractError("loss was not produced through a computation tape")

    pending: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}
    reached: Dict[int, Tensor] = {id(loss): loss}

    for entry in reversed(tape.entries):
        upstream = pending.get(id(entry.output))
        if upstream is None:
            continue
        local_grads = entry.backward(upstream)
        for inp, g in zip(entry.inputs, local_grads):
            if g is None or not inp.requires_grad:
                continue
            key = id(inp)
            pending[key] = pending[key] + g if key in pending else np.asarray(g, dtype=np.float64)
            reached[key] = inp

    for key, tensor in reached.items():
        g = pending[key].reshape(tensor.shape)
        tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g

    logger.debug(f"Reverse sweep over {len(tape)} ops reached {len(reached)} tensors")
