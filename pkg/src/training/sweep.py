"""
Hyper-parameter sweeps: one training run per grid point and seed, scored on
the same held-out set, plus mean / 2σ summaries per grid point.
"""

import itertools
import logging
from typing import Any, Dict, Mapping, Sequence

import pandas as pd

from src.data.dataset import Dataset
from src.training.config import TrainConfig
from src.training.evaluation import evaluate
from src.training.trainer import train

logger = logging.getLogger(__name__)


def expand_grid(grid: Mapping[str, Sequence[Any]]) -> list:
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def run_sweep(
    train_set: Dataset,
    test_set: Dataset,
    base_cfg: TrainConfig,
    grid: Mapping[str, Sequence[Any]],
    seeds: Sequence[int] = (42,),
) -> pd.DataFrame:
    """Train and evaluate every (grid point, seed); one row per run."""
    points = expand_grid(grid) if grid else [{}]
    rows = []
    logger.info(f"🔁 Sweep: {len(points)} grid point(s) × {len(seeds)} seed(s)")
    for point in points:
        for seed in seeds:
            cfg = base_cfg.with_updates({**point, "seed": seed})
            model, report = train(train_set, cfg)
            metrics = evaluate(model, test_set, cfg.k, cfg.edge_weighting)
            row: Dict[str, Any] = dict(point)
            row.update(
                seed=seed,
                mse=metrics.mse,
                mae=metrics.mae,
                final_total_loss=report.records[-1].total_loss,
                wall_clock_s=report.wall_clock_s,
            )
            rows.append(row)
            logger.info(f"  {point} seed={seed} → MSE={metrics.mse:.5f} MAE={metrics.mae:.5f}")
    return pd.DataFrame(rows)


def summarize_sweep(runs: pd.DataFrame, grid_keys: Sequence[str]) -> pd.DataFrame:
    """Mean, std and the mean ± 2σ band of MSE / MAE per grid point."""
    keys = list(grid_keys)
    grouped = runs.groupby(keys, sort=False) if keys else runs.assign(_all=0).groupby("_all")
    summary = grouped.agg(
        runs=("mse", "size"),
        mse_mean=("mse", "mean"),
        mse_std=("mse", "std"),
        mae_mean=("mae", "mean"),
        mae_std=("mae", "std"),
    ).reset_index()
    summary[["mse_std", "mae_std"]] = summary[["mse_std", "mae_std"]].fillna(0.0)
    summary["mse_lo"] = summary["mse_mean"] - 2 * summary["mse_std"]
    summary["mse_hi"] = summary["mse_mean"] + 2 * summary["mse_std"]
    if not keys:
        summary = summary.drop(columns="_all")
    return summary
