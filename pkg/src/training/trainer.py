"""
Batched PE-GNN training.

Every step samples a fresh batch, builds a kNN graph over the batch alone,
computes the batch's own ("shuffled") Moran's I targets, and takes one Adam
step on the fixed-λ or uncertainty-weighted objective.

Design decisions:
- Gradients are reset before every step.
- A non-finite loss aborts the run with the step index and loss components;
  skipping the step would hide divergence.
- Runs are deterministic for a fixed seed: batches, initialization and
  dropout draw from separate seeded streams.
"""

import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from src.autodiff.optim import AdamState, adam_step
from src.autodiff.tensor import ComputationTape, reverse_accumulate
from src.data.dataset import Dataset
from src.geo.graph import SpatialGraph, knn_graph
from src.model.losses import model_loss
from src.model.pegnn import PeGnnModel, model_forward
from src.spatial_stats.moran import batch_moran_target
from src.training.config import TrainConfig
from src.utils.constants import REPORT_COLUMNS
from src.utils.errors import InsufficientPointsError, NumericalAbortError

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════
# Batch, step and report records
# ═══════════════════════════════════════════════════════════════════════


@dataclass(eq=False)
class Batch:
    indices: np.ndarray       # rows of the training set
    X: np.ndarray
    C: np.ndarray             # model coordinates (normalized)
    C_deg: np.ndarray         # lon/lat degrees for the graph
    Y: np.ndarray


@dataclass
class StepRecord:
    step: int
    main_loss: float
    aux_loss: float
    total_loss: float
    sigma_main: float
    sigma_aux: float
    wall_clock_s: float


@dataclass(eq=False)
class StepContext:
    """What ``on_step`` hooks see after each update."""

    step: int
    batch: Batch
    graph: SpatialGraph
    moran_targets: np.ndarray
    record: StepRecord


@dataclass
class TrainReport:
    config: Dict[str, Any]
    seed: int
    records: List[StepRecord] = field(default_factory=list)
    wall_clock_s: float = 0.0
    test_metrics: Optional[Dict[str, float]] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records])

    def write_csv(self, path: str) -> str:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        frame = self.to_frame()
        if frame.empty:
            frame = pd.DataFrame(columns=REPORT_COLUMNS)
        frame[REPORT_COLUMNS].to_csv(path, index=False, float_format="%.17g")
        logger.info(f"📝 Wrote training report ({len(self.records)} steps) → {path}")
        return path

    def trailing_mean(self, window: int, end_step: Optional[int] = None, column: str = "total_loss") -> float:
        """Mean of ``column`` over the ``window`` steps ending at ``end_step`` (inclusive)."""
        end = len(self.records) if end_step is None else end_step
        chunk = [getattr(r, column) for r in self.records[max(0, end - window):end]]
        return float(np.mean(chunk)) if chunk else float("nan")

    def metrics_summary(self) -> Dict[str, Any]:
        metrics = self.test_metrics or {}
        return {
            "mse": metrics.get("mse"),
            "mae": metrics.get("mae"),
            "config_echo": self.config,
            "seed": self.seed,
            "wall_clock_s": round(self.wall_clock_s, 3),
        }

    def summary(self) -> str:
        last = self.records[-1] if self.records else None
        lines = [f"═══ Training Report (seed={self.seed}) ═══"]
        lines.append(f"  Steps       : {len(self.records)} in {self.wall_clock_s:.1f}s")
        if last is not None:
            lines.append(
                f"  Final loss  : total={last.total_loss:.5f} main={last.main_loss:.5f} aux={last.aux_loss:.5f}"
            )
            if not math.isnan(last.sigma_main):
                lines.append(f"  Task sigmas : main={last.sigma_main:.4f} aux={last.sigma_aux:.4f}")
        if self.test_metrics:
            lines.append(f"  Test        : MSE={self.test_metrics['mse']:.5f} MAE={self.test_metrics['mae']:.5f}")
        return "\n".join(lines) + "\n"


# ═══════════════════════════════════════════════════════════════════════
# Sampling
# ═══════════════════════════════════════════════════════════════════════


def sample_minibatch(train_set: Dataset, n_batch: int, rng: np.random.Generator) -> Batch:
    """
    Uniform sample without replacement inside the batch; the whole set
    (shuffled) when n_batch >= len(train_set). Each call is an independent draw.
    """
    n = len(train_set)
    if n == 0:
        raise InsufficientPointsError("Cannot sample a batch from an empty training set")
    idx = rng.permutation(n) if n_batch >= n else rng.choice(n, size=n_batch, replace=False)
    return Batch(
        indices=idx,
        X=train_set.features[idx],
        C=train_set.model_coords[idx],
        C_deg=train_set.coords[idx],
        Y=train_set.target[idx],
    )


# ═══════════════════════════════════════════════════════════════════════
# Trainer
# ═══════════════════════════════════════════════════════════════════════


class Trainer:
    """
    Usage:
        trainer = Trainer(train_set, TrainConfig(tsteps=500, n_batch=256))
        model, report = trainer.run()
        print(report.summary())
    """

    def __init__(
        self,
        train_set: Dataset,
        config: TrainConfig,
        on_step: Optional[Callable[[StepContext], None]] = None,
    ):
        if len(train_set) < config.k + 1:
            raise InsufficientPointsError(
                f"Training set has {len(train_set)} points; k={config.k} needs at least {config.k + 1}"
            )
        self.train_set = train_set
        self.config = config
        self.on_step = on_step
        self.model = PeGnnModel(config.network(train_set.feature_dim))
        self.params = self.model.parameters()
        self.optimizer = AdamState.for_parameters(self.params, lr=config.lr)
        self._batch_rng = np.random.default_rng([config.seed, 1])

    def step(self, step: int) -> StepContext:
        cfg = self.config
        t0 = time.perf_counter()

        batch = sample_minibatch(self.train_set, cfg.n_batch, self._batch_rng)
        graph = knn_graph(batch.C_deg, cfg.k, cfg.edge_weighting)
        moran = batch_moran_target(batch.Y, graph)

        self.model.zero_grad()
        with ComputationTape():
            y_hat, i_hat = model_forward(batch.X, batch.C, graph, self.model, training=True)
            loss = model_loss(y_hat, batch.Y, i_hat, moran, self.model.loss_weights)

        main = float(np.mean((y_hat.values - batch.Y) ** 2))
        aux = float(np.mean((i_hat.values - moran) ** 2))
        total = loss.item()
        if not all(math.isfinite(v) for v in (main, aux, total)):
            logger.error(f"❌ Non-finite loss at step {step}: total={total} main={main} aux={aux}")
            raise NumericalAbortError(step, {"total_loss": total, "main_loss": main, "aux_loss": aux})

        reverse_accumulate(loss)
        adam_step(self.params, self.optimizer)

        sigma_main, sigma_aux = self.model.loss_weights.sigmas()
        record = StepRecord(
            step=step,
            main_loss=main,
            aux_loss=aux,
            total_loss=total,
            sigma_main=sigma_main,
            sigma_aux=sigma_aux,
            wall_clock_s=time.perf_counter() - t0,
        )
        return StepContext(step=step, batch=batch, graph=graph, moran_targets=moran, record=record)

    def run(self):
        cfg = self.config
        logger.info(
            f"🚀 Training {'PE-' if cfg.use_pe else ''}{cfg.backbone.upper()} | "
            f"{len(self.train_set)} points | {cfg.tsteps} steps | batch={cfg.n_batch} k={cfg.k} | "
            f"{'learned loss weights' if cfg.learn_loss_weights else f'λ={cfg.lam}'} | "
            f"{self.model.num_parameters()} parameters"
        )
        report = TrainReport(config=cfg.echo(), seed=cfg.seed)
        start = time.perf_counter()

        for step in range(1, cfg.tsteps + 1):
            ctx = self.step(step)
            report.records.append(ctx.record)
            if self.on_step is not None:
                self.on_step(ctx)
            if step % cfg.log_every == 0 or step == cfg.tsteps:
                logger.info(
                    f"  step {step}/{cfg.tsteps} | total={ctx.record.total_loss:.5f} "
                    f"main={ctx.record.main_loss:.5f} aux={ctx.record.aux_loss:.5f}"
                )
            else:
                logger.debug(f"  step {step} | total={ctx.record.total_loss:.6f}")

        report.wall_clock_s = time.perf_counter() - start
        logger.info(f"✅ Training complete in {report.wall_clock_s:.1f}s")
        return self.model, report


def train(
    train_set: Dataset,
    cfg: TrainConfig,
    on_step: Optional[Callable[[StepContext], None]] = None,
):
    """Run the batched training loop; returns (model, report)."""
    return Trainer(train_set, cfg, on_step=on_step).run()
