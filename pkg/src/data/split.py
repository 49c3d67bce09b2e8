"""
Seeded train/test partition.
"""

from dataclasses import dataclass

import numpy as np

from src.utils.errors import InsufficientPointsError, ParameterError


@dataclass(eq=False)
class Split:
    train: np.ndarray
    test: np.ndarray
    seed: int
    test_fraction: float


def train_test_split(n: int, test_fraction: float = 0.2, seed: int = 42) -> Split:
    """Uniform random partition with |test| = round(n · test_fraction); index arrays are sorted."""
    if not 0.0 < test_fraction < 1.0:
        raise ParameterError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if n < 4:
        raise InsufficientPointsError(f"train_test_split needs n >= 4, got {n}")
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n_test > n - 1:
        raise InsufficientPointsError(f"test_fraction={test_fraction} leaves an empty split for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return Split(
        train=np.sort(perm[n_test:]),
        test=np.sort(perm[:n_test]),
        seed=seed,
        test_fraction=test_fraction,
    )
