"""
Exception hierarchy for the PE-GNN toolkit.

Every error also derives from the closest builtin so callers that only catch
ValueError / RuntimeError / ArithmeticError keep working.
"""

from typing import Dict, Optional


class PeGnnError(Exception):
    """Root of all library errors."""


class DimensionError(PeGnnError, ValueError):
    """Tensor or array shapes do not agree."""


class ParameterError(PeGnnError, ValueError):
    """A numeric hyper-parameter is outside its valid range."""


class ConfigError(PeGnnError, ValueError):
    """A configuration object is internally inconsistent."""


class ContractError(PeGnnError, RuntimeError):
    """An API was called in a state its contract does not allow."""


class CoordinateRangeError(PeGnnError, ValueError):
    """Longitude or latitude outside the valid degree range."""


class InsufficientPointsError(PeGnnError, ValueError):
    """Too few points for the requested operation."""


class SchemaError(PeGnnError, ValueError):
    """Declared dataset columns are missing from the input."""


class DataLoadError(PeGnnError, ValueError):
    """Malformed rows were found while loading a dataset in strict mode."""


class CheckpointError(PeGnnError, ValueError):
    """A checkpoint could not be read or does not match its config."""


class EvaluationError(PeGnnError, ArithmeticError):
    """An objective evaluated to a non-finite value."""


class NumericalAbortError(PeGnnError, ArithmeticError):
    """Training produced a non-finite loss and was stopped."""

    def __init__(self, step: int, components: Dict[str, float], message: Optional[str] = None):
        self.step = step
        self.components = dict(components)
        detail = ", ".join(f"{k}={v!r}" for k, v in self.components.items())
        super().__init__(message or f"non-finite loss at step {step} ({detail})")
