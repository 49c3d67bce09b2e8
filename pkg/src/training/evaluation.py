"""
Held-out evaluation.

The test graph connects test points to each other only. Only the main head is
scored; the auxiliary head's output is returned by ``predict`` but not graded.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from src.data.dataset import Dataset
from src.geo.graph import knn_graph
from src.model.pegnn import PeGnnModel, model_forward
from src.utils.constants import EdgeWeighting
from src.utils.errors import InsufficientPointsError

logger = logging.getLogger(__name__)


@dataclass
class EvalMetrics:
    mse: float
    mae: float
    n: int

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def predict(
    model: PeGnnModel,
    ds: Dataset,
    k: int = 5,
    edge_weighting: str = EdgeWeighting.BINARY,
) -> Tuple[np.ndarray, np.ndarray]:
    """Eval-mode (Ŷ, Î) over one kNN graph of all points in ``ds``."""
    if len(ds) < 2:
        raise InsufficientPointsError(f"Evaluation needs at least 2 points for a graph, got {len(ds)}")
    graph = knn_graph(ds.coords, k, edge_weighting)
    y_hat, i_hat = model_forward(ds.features, ds.model_coords, graph, model, training=False)
    return y_hat.values.copy(), i_hat.values.copy()


def score(y_hat: np.ndarray, y: np.ndarray) -> EvalMetrics:
    err = np.asarray(y_hat, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return EvalMetrics(mse=float(np.mean(err ** 2)), mae=float(np.mean(np.abs(err))), n=int(err.size))


def evaluate(
    model: PeGnnModel,
    test_set: Dataset,
    k: int = 5,
    edge_weighting: str = EdgeWeighting.BINARY,
) -> EvalMetrics:
    """MSE and MAE of the main head against the (normalized) test targets."""
    y_hat, _ = predict(model, test_set, k, edge_weighting)
    metrics = score(y_hat, test_set.target)
    logger.info(f"📊 Test MSE={metrics.mse:.5f} MAE={metrics.mae:.5f} (n={metrics.n})")
    return metrics
