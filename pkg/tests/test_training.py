import os
import sys

import numpy as np
import pandas as pd
import pytest

# Add project root to sys.path for absolute imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.data.dataset import CsvSchema, Dataset, load_csv
from src.data.normalization import fit_apply_minmax
from src.data.split import train_test_split
from src.data.synthetic import synth_generate
from src.model.checkpoint import checkpoint_dict
from src.training.config import TrainConfig
from src.training.evaluation import EvalMetrics, evaluate, predict, score
from src.training.sweep import expand_grid, run_sweep, summarize_sweep
from src.training.trainer import Trainer, TrainReport, StepRecord, sample_minibatch, train
from src.utils.constants import REPORT_COLUMNS
from src.utils.errors import InsufficientPointsError, NumericalAbortError


def fast_config(**overrides):
    base = dict(tsteps=5, n_batch=64, k=5, emb_dim=8, hidden_dim=8, num_scales=4, log_every=1000, seed=1)
    base.update(overrides)
    return TrainConfig(**base)


def synth_split(n=300, seed=7):
    ds = synth_generate(n, seed=seed)
    split = train_test_split(len(ds), 0.2, seed=42)
    normalized = fit_apply_minmax(ds, split)
    return normalized.subset(split.train), normalized.subset(split.test)


@pytest.fixture(scope="module")
def small_sets():
    return synth_split()


# ─── Configuration ───


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.k, cfg.n_batch, cfg.tsteps, cfg.lr, cfg.lam) == (5, 1024, 1500, 1e-3, 0.0)
        assert cfg.edge_weighting == "binary" and cfg.backbone == "gcn"

    def test_aliases(self):
        cfg = TrainConfig.model_validate({"lambda": 0.25, "S": 8})
        assert cfg.lam == 0.25 and cfg.num_scales == 8
        assert cfg.echo()["lambda"] == 0.25 and cfg.echo()["S"] == 8

    @pytest.mark.parametrize(
        "bad",
        [{"n_batch": 5, "k": 5}, {"sigma_min": 2.0}, {"S": 1}, {"lambda": 1.0}, {"tsteps": 0}, {"lr": 0}, {"kk": 3}],
    )
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            TrainConfig.model_validate(bad)

    def test_with_updates_accepts_field_names_and_aliases(self):
        cfg = TrainConfig().with_updates({"lambda": 0.5, "k": 3, "seed": 9})
        assert (cfg.lam, cfg.k, cfg.seed) == (0.5, 3, 9)
        assert TrainConfig().with_updates({"lam": 0.1}).lam == 0.1

    def test_network_config(self):
        net = TrainConfig(learn_loss_weights=True, use_pe=False).network(feature_dim=3)
        assert net.loss_mode == "learned"
        assert net.input_dim == 5


# ─── Sampling ───


class TestSampleMinibatch:
    def test_full_batch_is_shuffled_identity(self, small_sets):
        train_set, _ = small_sets
        batch = sample_minibatch(train_set, len(train_set) + 10, np.random.default_rng(0))
        assert sorted(batch.indices.tolist()) == list(range(len(train_set)))
        assert np.array_equal(batch.Y, train_set.target[batch.indices])
        assert np.array_equal(batch.C_deg, train_set.coords[batch.indices])

    def test_seeded_sequence(self, small_sets):
        train_set, _ = small_sets
        rng_a, rng_b = np.random.default_rng(5), np.random.default_rng(5)
        for _ in range(5):
            a = sample_minibatch(train_set, 16, rng_a)
            b = sample_minibatch(train_set, 16, rng_b)
            assert np.array_equal(a.indices, b.indices)

    def test_no_replacement_within_batch(self, small_sets):
        train_set, _ = small_sets
        batch = sample_minibatch(train_set, 50, np.random.default_rng(1))
        assert len(set(batch.indices.tolist())) == 50

    def test_inclusion_frequency(self):
        ds = Dataset(coords=np.zeros((1000, 2)), features=np.zeros((1000, 0)), target=np.zeros(1000))
        rng = np.random.default_rng(2)
        counts = np.zeros(1000)
        draws = 10_000
        for _ in range(draws):
            counts[sample_minibatch(ds, 32, rng).indices] += 1
        p = 32 / 1000
        sigma = np.sqrt(draws * p * (1 - p))
        deviation = np.abs(counts - draws * p)
        assert np.mean(deviation <= 3 * sigma) >= 0.99
        assert np.all(deviation <= 5 * sigma)

    def test_empty(self):
        empty = Dataset(coords=np.zeros((0, 2)), features=np.zeros((0, 0)), target=np.zeros(0))
        with pytest.raises(InsufficientPointsError):
            sample_minibatch(empty, 4, np.random.default_rng(0))


# ─── Training loop ───


class TestTrain:
    def test_single_step_updates_parameters(self, small_sets):
        train_set, _ = small_sets
        cfg = fast_config(tsteps=1)
        trainer = Trainer(train_set, cfg)
        before = {k: v.values.copy() for k, v in trainer.model.parameters().items()}
        model, report = trainer.run()
        assert len(report.records) == 1
        assert trainer.optimizer.t == 1
        assert any(not np.array_equal(before[k], v.values) for k, v in model.parameters().items())

    def test_deterministic(self, small_sets):
        train_set, _ = small_sets
        cfg = fast_config(tsteps=4, dropout_p=0.3)
        a, report_a = train(train_set, cfg)
        b, report_b = train(train_set, cfg)
        for (name, pa), pb in zip(a.parameters().items(), b.parameters().values()):
            assert np.array_equal(pa.values, pb.values), name
        assert [r.total_loss for r in report_a.records] == [r.total_loss for r in report_b.records]

    def test_records_are_finite(self, small_sets):
        train_set, _ = small_sets
        _, report = train(train_set, fast_config(tsteps=6, lam=0.5))
        assert [r.step for r in report.records] == list(range(1, 7))
        for r in report.records:
            assert np.isfinite([r.main_loss, r.aux_loss, r.total_loss]).all()
            assert np.isnan(r.sigma_main)

    def test_learned_weights_report_sigmas(self, small_sets):
        train_set, _ = small_sets
        _, report = train(train_set, fast_config(tsteps=5, learn_loss_weights=True))
        sigmas = np.array([[r.sigma_main, r.sigma_aux] for r in report.records])
        assert np.all(np.isfinite(sigmas)) and np.all(sigmas > 0)
        assert not np.allclose(sigmas, 1.0)

    def test_batch_graphs_stay_inside_batch(self, small_sets):
        train_set, _ = small_sets
        seen = []

        def check(ctx):
            n = len(ctx.batch.indices)
            assert ctx.graph.n == n
            assert ctx.graph.src.max() < n and ctx.graph.dst.max() < n
            assert ctx.moran_targets.shape == (n,)
            seen.append(ctx.step)

        train(train_set, fast_config(tsteps=3), on_step=check)
        assert seen == [1, 2, 3]

    def test_shuffled_moran_targets_vary(self):
        ds = synth_generate(1000, seed=7)
        split = train_test_split(1000, 0.2, seed=42)
        train_set = fit_apply_minmax(ds, split).subset(split.train)
        targets = {}

        def collect(ctx):
            for idx, value in zip(ctx.batch.indices.tolist(), ctx.moran_targets):
                targets.setdefault(idx, []).append(value)

        train(train_set, fast_config(tsteps=100, n_batch=64, k=5), on_step=collect)
        repeated = [v for v in targets.values() if len(v) >= 2]
        assert repeated
        assert any(max(v) - min(v) > 1e-6 for v in repeated)

    def test_non_finite_loss_aborts(self):
        ds = synth_generate(50, seed=1)
        ds.target[:] = np.nan
        with pytest.raises(NumericalAbortError) as excinfo:
            train(ds, fast_config(tsteps=3, n_batch=20))
        assert excinfo.value.step == 1
        assert set(excinfo.value.components) == {"total_loss", "main_loss", "aux_loss"}

    def test_too_few_points(self):
        ds = synth_generate(10, seed=1).subset(range(5))
        with pytest.raises(InsufficientPointsError):
            train(ds, fast_config(k=5))

    def test_sage_backbone_trains(self, small_sets):
        train_set, _ = small_sets
        _, report = train(train_set, fast_config(backbone="sage", edge_weighting="inverse_distance"))
        assert np.isfinite(report.records[-1].total_loss)


# ─── Report ───


class TestTrainReport:
    def make_report(self):
        records = [StepRecord(s, 1.0 / s, 0.5 / s, 1.5 / s, float("nan"), float("nan"), 0.01) for s in range(1, 11)]
        return TrainReport(config={"k": 5}, seed=3, records=records, wall_clock_s=0.1,
                           test_metrics={"mse": 0.02, "mae": 0.1, "n": 8})

    def test_csv_columns(self, tmp_path):
        path = self.make_report().write_csv(str(tmp_path / "out" / "report.csv"))
        frame = pd.read_csv(path)
        assert list(frame.columns) == REPORT_COLUMNS
        assert len(frame) == 10

    def test_trailing_mean(self):
        report = self.make_report()
        assert report.trailing_mean(2, end_step=2) == pytest.approx((1.5 + 0.75) / 2)
        assert report.trailing_mean(100) == pytest.approx(np.mean([1.5 / s for s in range(1, 11)]))

    def test_metrics_summary(self):
        summary = self.make_report().metrics_summary()
        assert set(summary) == {"mse", "mae", "config_echo", "seed", "wall_clock_s"}
        assert summary["mse"] == 0.02

    def test_summary_text(self):
        text = self.make_report().summary()
        assert "Training Report (seed=3)" in text and "MSE=0.02000" in text


# ─── Evaluation ───


class TestEvaluation:
    def test_score_oracle_and_constant(self):
        y = np.array([0.0, 0.25, 0.5, 1.0])
        assert score(y, y).mse == 0.0 and score(y, y).mae == 0.0
        constant = score(np.full(4, y.mean()), y)
        assert constant.mse == pytest.approx(np.var(y))
        assert constant.mae ** 2 <= constant.mse

    def test_evaluate_does_not_mutate(self, small_sets):
        train_set, test_set = small_sets
        model, _ = train(train_set, fast_config(tsteps=2))
        before = checkpoint_dict(model)
        metrics = evaluate(model, test_set, k=5)
        assert isinstance(metrics, EvalMetrics)
        assert checkpoint_dict(model) == before
        assert metrics.mse >= 0 and metrics.mae >= 0 and metrics.mae ** 2 <= metrics.mse + 1e-15
        assert metrics.n == len(test_set)

    def test_predict_is_deterministic(self, small_sets):
        train_set, test_set = small_sets
        model, _ = train(train_set, fast_config(tsteps=2, dropout_p=0.5))
        a, _ = predict(model, test_set, 5)
        b, _ = predict(model, test_set, 5)
        assert np.array_equal(a, b)

    def test_needs_two_points(self, small_sets):
        train_set, test_set = small_sets
        model, _ = train(train_set, fast_config(tsteps=1))
        with pytest.raises(InsufficientPointsError):
            evaluate(model, test_set.subset([0]), k=5)


# ─── Sweeps ───


class TestSweep:
    def test_expand_grid(self):
        assert expand_grid({"lambda": [0, 0.5], "k": [3]}) == [{"lambda": 0, "k": 3}, {"lambda": 0.5, "k": 3}]

    def test_run_and_summarize(self, small_sets):
        train_set, test_set = small_sets
        runs = run_sweep(train_set, test_set, fast_config(tsteps=2), {"lambda": [0.0, 0.5]}, seeds=[1, 2])
        assert len(runs) == 4
        assert set(runs.columns) >= {"lambda", "seed", "mse", "mae", "final_total_loss"}
        summary = summarize_sweep(runs, ["lambda"])
        assert summary["runs"].tolist() == [2, 2]
        assert np.all(summary["mse_lo"] <= summary["mse_hi"])


# ─── Acceptance-scale runs ───


def trend_holds(report, window=100, early=100, late=1000):
    return report.trailing_mean(window, late) < report.trailing_mean(window, early)


@pytest.mark.slow
class TestAcceptance:
    @pytest.fixture(scope="class")
    def synth_sets(self):
        return synth_split(n=2000, seed=7)

    def acceptance_config(self, **overrides):
        base = dict(tsteps=1000, n_batch=1024, k=5, hidden_dim=64, emb_dim=64, log_every=250)
        base.update(overrides)
        return TrainConfig(**base)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_positional_encoding_beats_raw_coordinates(self, synth_sets, seed):
        train_set, test_set = synth_sets
        pe_model, _ = train(train_set, self.acceptance_config(seed=seed, lam=0.0))
        plain_model, _ = train(train_set, self.acceptance_config(seed=seed, lam=0.0, use_pe=False))
        pe_mse = evaluate(pe_model, test_set).mse
        plain_mse = evaluate(plain_model, test_set).mse
        assert pe_mse <= 0.7 * plain_mse

    def test_auxiliary_weight_sweep_and_learned_weights(self, synth_sets):
        train_set, test_set = synth_sets
        fixed_mse = {}
        for lam in (0.0, 0.25, 0.5, 0.75):
            model, report = train(train_set, self.acceptance_config(lam=lam, seed=1))
            assert all(np.isfinite(r.total_loss) for r in report.records)
            assert trend_holds(report)
            fixed_mse[lam] = evaluate(model, test_set).mse

        model, report = train(train_set, self.acceptance_config(learn_loss_weights=True, seed=1))
        sigmas = np.array([[r.sigma_main, r.sigma_aux] for r in report.records])
        assert np.all(np.isfinite(sigmas)) and np.all(sigmas > 0)
        assert evaluate(model, test_set).mse <= 1.2 * min(fixed_mse.values())

    def test_full_scale_determinism(self, synth_sets):
        train_set, _ = synth_sets
        cfg = self.acceptance_config(lam=0.5, seed=2)
        a, _ = train(train_set, cfg)
        b, _ = train(train_set, cfg)
        assert checkpoint_dict(a) == checkpoint_dict(b)

    def test_california_housing_direction(self):
        path = os.environ.get("PEGNN_CALI_CSV")
        if not path or not os.path.exists(path):
            pytest.skip("set PEGNN_CALI_CSV to the California Housing CSV to run this check")
        schema = CsvSchema(
            lon_col="longitude",
            lat_col="latitude",
            target_col="median_house_value",
            feature_cols=("housing_median_age", "total_rooms", "total_bedrooms",
                          "population", "households", "median_income"),
        )
        ds = load_csv(path, schema, strict=False)
        split = train_test_split(len(ds), 0.2, seed=42)
        normalized = fit_apply_minmax(ds, split)
        train_set, test_set = normalized.subset(split.train), normalized.subset(split.test)
        cfg = self.acceptance_config(tsteps=1500, n_batch=2048)
        pe_model, _ = train(train_set, cfg)
        plain_model, _ = train(train_set, cfg.with_updates({"use_pe": False}))
        pe_mse = evaluate(pe_model, test_set).mse
        assert pe_mse < evaluate(plain_model, test_set).mse
        assert pe_mse < 0.030
