"""
PE-GNN command line.

    python -m src synth  --n 2000 --seed 7 --out synth.csv
    python -m src moran  --data synth.csv --k 5 --out moran.csv
    python -m src train  --config config/default_run.yaml --data synth.csv --out runs/a
    python -m src eval   --model runs/a/checkpoint.json --data synth.csv
    python -m src encode --model runs/a/checkpoint.json --data synth.csv --out emb.csv
    python -m src sweep  --config c.yaml --grid lambda=0,0.25 --seeds 1,2,3 --out runs/sweep

Exit codes: 0 ok, 1 usage, 2 data/validation, 3 numerical abort.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
import yaml
from pydantic import ValidationError

from src.data.dataset import CsvSchema, Dataset, load_csv, save_csv
from src.data.normalization import DatasetNormalizer, fit_apply_minmax
from src.data.split import train_test_split
from src.data.synthetic import synth_generate
from src.engine.config_loader import RunConfig, load_run_config
from src.geo.graph import knn_graph, row_standardize
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.observability.logging_config import setup_logging
from src.spatial_stats.moran import local_moran
from src.training.evaluation import evaluate
from src.training.sweep import run_sweep, summarize_sweep
from src.training.trainer import train
from src.utils.constants import EdgeWeighting, ExitCode
from src.utils.errors import EvaluationError, NumericalAbortError, PeGnnError

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad command-line usage; maps to exit 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# ═══════════════════════════════════════════════════════════════════════
# Helpers
# ═══════════════════════════════════════════════════════════════════════


def _write_json(path: str, payload: Dict[str, Any]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _load_split(run: RunConfig) -> Tuple[Dataset, Dataset, Dataset]:
    """Load the run's CSV, split it, fit min-max on the train rows; returns (normalized, train, test)."""
    if not run.data.path:
        raise UsageError("no dataset given (use --data or data.path in the config)")
    ds = load_csv(run.data.path, run.data.csv_schema(), strict=run.data.strict)
    split = train_test_split(len(ds), run.data.test_fraction, run.data.split_seed)
    normalized = fit_apply_minmax(ds, split)
    return normalized, normalized.subset(split.train), normalized.subset(split.test)


def _checkpoint_dataset(path: str, extras: Dict[str, Any]) -> Dataset:
    """Load a CSV with the schema and normalization stored in a checkpoint."""
    schema_doc = extras.get("schema") or {}
    schema = CsvSchema(
        lon_col=schema_doc.get("lon_col", "lon"),
        lat_col=schema_doc.get("lat_col", "lat"),
        target_col=schema_doc.get("target_col", "y"),
        feature_cols=tuple(schema_doc.get("feature_cols", ())),
    )
    ds = load_csv(path, schema, strict=schema_doc.get("strict", True))
    if extras.get("normalizer"):
        ds = DatasetNormalizer.from_dict(extras["normalizer"]).apply(ds)
    return ds


def _parse_grid(items: Sequence[str]) -> Dict[str, List[Any]]:
    grid: Dict[str, List[Any]] = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--grid expects key=v1,v2,..., got {item!r}")
        key, values = item.split("=", 1)
        grid[key.strip()] = [yaml.safe_load(v) for v in values.split(",") if v.strip()]
    return grid


def _parse_seeds(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise UsageError(f"--seeds expects comma-separated integers, got {text!r}") from e


# ═══════════════════════════════════════════════════════════════════════
# Subcommands
# ═══════════════════════════════════════════════════════════════════════


def cmd_train(args) -> int:
    run = load_run_config(args.config, args.set or [], data_path=args.data, out_dir=args.out)
    os.makedirs(run.out_dir, exist_ok=True)
    setup_logging(args.log_config, _level(args.log_level), log_dir=run.out_dir)

    normalized, train_set, test_set = _load_split(run)
    cfg = run.train
    model, report = train(train_set, cfg)
    metrics = evaluate(model, test_set, cfg.k, cfg.edge_weighting)
    report.test_metrics = metrics.to_dict()

    extras = {
        "normalizer": normalized.normalizer.to_dict(),
        "schema": run.data.model_dump(mode="json", exclude={"path", "test_fraction", "split_seed"}),
        "feature_names": list(normalized.feature_names),
        "target_name": normalized.target_name,
        "k": cfg.k,
        "edge_weighting": cfg.edge_weighting,
        "train_config": cfg.echo(),
    }
    save_checkpoint(model, os.path.join(run.out_dir, "checkpoint.json"), extras)
    report.write_csv(os.path.join(run.out_dir, "report.csv"))
    summary = report.metrics_summary()
    summary["config_echo"] = run.echo()
    _write_json(os.path.join(run.out_dir, "metrics.json"), summary)

    sys.stderr.write(report.summary())
    print(f"MSE={metrics.mse:.6f} MAE={metrics.mae:.6f}")
    return ExitCode.OK


def cmd_eval(args) -> int:
    model, extras = load_checkpoint(args.model)
    ds = _checkpoint_dataset(args.data, extras)
    k = args.k if args.k is not None else extras.get("k", 5)
    metrics = evaluate(model, ds, k, extras.get("edge_weighting", EdgeWeighting.BINARY))
    print(json.dumps(metrics.to_dict(), sort_keys=True))
    return ExitCode.OK


def cmd_encode(args) -> int:
    model, extras = load_checkpoint(args.model)
    ds = _checkpoint_dataset(args.data, extras)
    emb = model.embed(ds.model_coords)
    frame = pd.DataFrame(emb, columns=[f"e{j}" for j in range(emb.shape[1])])
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    frame.to_csv(args.out, index=False, float_format="%.17g")
    logger.info(f"📝 Wrote {len(frame)} embeddings (dim {emb.shape[1]}) → {args.out}")
    return ExitCode.OK


def cmd_moran(args) -> int:
    schema = CsvSchema(args.lon_col, args.lat_col, args.target_col)
    ds = load_csv(args.data, schema)
    graph = knn_graph(ds.coords, args.k, args.edge_weighting)
    result = local_moran(ds.target, row_standardize(graph))
    if result.degenerate:
        logger.warning("⚠️ Constant target; every local Moran's I is zero")
    frame = pd.DataFrame({"lon": ds.coords[:, 0], "lat": ds.coords[:, 1], "moran_i": result.values})
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    frame.to_csv(args.out, index=False, float_format="%.17g")
    logger.info(f"📝 Wrote local Moran's I for {len(frame)} points (k={graph.k}) → {args.out}")
    return ExitCode.OK


def cmd_synth(args) -> int:
    ds = synth_generate(args.n, seed=args.seed, noise=args.noise)
    save_csv(ds, args.out)
    return ExitCode.OK


def cmd_sweep(args) -> int:
    run = load_run_config(args.config, args.set or [], data_path=args.data, out_dir=args.out)
    os.makedirs(run.out_dir, exist_ok=True)
    setup_logging(args.log_config, _level(args.log_level), log_dir=run.out_dir)

    grid = _parse_grid(args.grid or [])
    seeds = _parse_seeds(args.seeds)
    _, train_set, test_set = _load_split(run)
    runs = run_sweep(train_set, test_set, run.train, grid, seeds)
    summary = summarize_sweep(runs, list(grid))
    runs.to_csv(os.path.join(run.out_dir, "sweep_runs.csv"), index=False, float_format="%.17g")
    summary.to_csv(os.path.join(run.out_dir, "sweep_summary.csv"), index=False, float_format="%.17g")
    print(summary.to_string(index=False))
    return ExitCode.OK


# ═══════════════════════════════════════════════════════════════════════
# Parser & dispatch
# ═══════════════════════════════════════════════════════════════════════


def _level(name: str) -> int:
    return getattr(logging, name.upper(), logging.INFO)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pegnn", description="Positional-encoding graph neural networks for geospatial data")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-config", default="config/logging.yaml", help="dictConfig YAML file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="Train a model and write checkpoint, report and metrics")
    p.add_argument("--config", help="Run config (JSON or YAML)")
    p.add_argument("--data", help="Dataset CSV (overrides data.path)")
    p.add_argument("--out", help="Output directory (overrides out_dir)")
    p.add_argument("--set", action="append", metavar="SECTION.FIELD=VALUE", help="Override a config field")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Score a checkpoint on a CSV; prints metrics JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=None, help="Graph k (defaults to the training k)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("encode", help="Dump positional embeddings as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("moran", help="Per-point local Moran's I of the target column")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--edge-weighting", default=EdgeWeighting.BINARY,
                   choices=[EdgeWeighting.BINARY, EdgeWeighting.INVERSE_DISTANCE])
    p.add_argument("--lon-col", default="lon")
    p.add_argument("--lat-col", default="lat")
    p.add_argument("--target-col", default="y")
    p.set_defaults(func=cmd_moran)

    p = sub.add_parser("synth", help="Write a synthetic spatially autocorrelated dataset")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="Train over a hyper-parameter grid and several seeds")
    p.add_argument("--config")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--set", action="append", metavar="SECTION.FIELD=VALUE")
    p.add_argument("--grid", action="append", metavar="FIELD=V1,V2", help="Train field and values to sweep")
    p.add_argument("--seeds", default="42")
    p.set_defaults(func=cmd_sweep)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return ExitCode.USAGE
    except SystemExit as e:   # --help
        return int(e.code or 0)

    if args.command not in ("train", "sweep"):
        setup_logging(args.log_config, _level(args.log_level))

    try:
        return int(args.func(args))
    except UsageError as e:
        sys.stderr.write(f"usage error: {e}\n")
        return ExitCode.USAGE
    except (NumericalAbortError, EvaluationError) as e:
        sys.stderr.write(f"numerical error: {e}\n")
        return ExitCode.NUMERICAL
    except ValidationError as e:
        first = e.errors()[0] if e.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        sys.stderr.write(f"invalid config: {where}: {first.get('msg', e)} ({e.error_count()} error(s))\n")
        return ExitCode.DATA
    except (PeGnnError, OSError) as e:
        sys.stderr.write(f"error: {str(e).splitlines()[0] if str(e) else type(e).__name__}\n")
        return ExitCode.DATA


def main():
    sys.exit(run_cli())
