import statistics
from dataclasses import dataclass, field

import numpy as np
import pytest

from conftest import random_dataset
from randlink.data import Dataset, stratified_kfold
from randlink.harness import (
    EvalReport,
    GridCell,
    GridSpec,
    best_cell,
    cross_validate,
    grid_search,
    nested_cross_validate,
    time_method,
    tune_layer_lambdas,
    worker_count,
)
from randlink.methods import MethodSpec
from randlink.shallow import NetworkConfig


class _Constant:
    def predict(self, X):
        return np.zeros(len(X), dtype=int)


@dataclass
class ConstantSpec:
    name: str = "constant"

    def fit(self, ds):
        return _Constant()


@dataclass
class SpySpec:
    """Records the row ids (stored in feature column 0) of every training set."""

    inner: MethodSpec
    seen: list = field(default_factory=list)
    seen_params: list = field(default_factory=list)
    name: str = "spy"

    def fit(self, ds):
        self.seen.append(frozenset(ds.features[:, 0].astype(int).tolist()))
        model = self.inner.fit(ds)
        self.seen_params.append(model.norm_params)
        return model


def _balanced(T=40, d=3, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(rng.normal(size=(T, d)), np.arange(T) % 2, 2, "balanced")


class TestCrossValidate:
    def test_constant_predictor_base_rate(self):
        report = cross_validate(ConstantSpec(), _balanced(), k=10, seed=0)
        assert report.mean_accuracy == pytest.approx(0.5, abs=0.05)
        assert report.k == 10

    def test_perfect_folds(self):
        report = EvalReport.from_folds("m", "d", [1.0] * 10)
        assert report.mean_accuracy == 1.0 and report.std_accuracy == 0.0

    def test_moments_by_reordered_sum(self, rng):
        accs = rng.uniform(size=10)
        report = EvalReport.from_folds("m", "d", accs)
        mean = sum(sorted(accs.tolist(), reverse=True)) / 10
        var = sum((a - mean) ** 2 for a in reversed(accs.tolist())) / 10
        assert abs(report.mean_accuracy - mean) < 1e-12
        assert abs(report.std_accuracy - var ** 0.5) < 1e-12

    def test_no_test_rows_reach_training(self, rng):
        X = rng.normal(size=(50, 3))
        X[:, 0] = np.arange(50)  # row ids ride along as a feature
        ds = Dataset(X, np.arange(50) % 2, 2, "ids")
        spy = SpySpec(MethodSpec("rvfl", NetworkConfig(n_hidden=5)))
        cross_validate(spy, ds, k=5, seed=3, workers=1)
        plan = stratified_kfold(ds, 5, 3)
        for f, (seen, params) in enumerate(zip(spy.seen, spy.seen_params)):
            train_ids = set(plan.train_indices(f).tolist())
            assert seen == train_ids
            assert seen.isdisjoint(plan.test_indices(f).tolist())
            # Normalization statistics come from exactly these rows.
            np.testing.assert_array_equal(params.shift, X[sorted(train_ids)].min(axis=0))

    def test_reproducible(self, rng):
        ds = random_dataset(rng, T=60, d=4, K=3)
        spec = MethodSpec("edrvfl", NetworkConfig(n_hidden=10, n_layers=3))
        a = cross_validate(spec, ds, k=5, seed=1)
        b = cross_validate(spec, ds, k=5, seed=1, workers=3)
        assert a.fold_accuracies == b.fold_accuracies

    def test_report_dict_round_trip(self):
        report = EvalReport.from_folds("rvfl", "toy", [0.5, 1.0], chosen_config={"lam": 1.0})
        assert EvalReport.from_dict(report.to_dict()) == report


class TestGridSearch:
    def test_default_grid_size(self):
        grid = GridSpec()
        assert grid.size() == 100
        assert grid.size(shallow=True) == 10
        assert grid.C_exponents == (-6, -4, -2, 0, 2, 4, 6, 8, 10, 12)

    def test_singleton_equals_cross_validate(self, rng):
        ds = random_dataset(rng, T=50, d=3, K=2)
        spec = MethodSpec("drvfl", NetworkConfig(n_hidden=12))
        best, cells = grid_search(spec, ds, GridSpec((2,), (3,), (12,)), k=5, seed=4)
        direct = cross_validate(spec.with_config(lam=0.25, n_layers=3), ds, k=5, seed=4)
        assert len(cells) == 1
        assert cells[0].report.fold_accuracies == direct.fold_accuracies
        assert best.config.lam == 0.25 and best.config.n_layers == 3

    def test_best_by_rescan(self, rng):
        ds = random_dataset(rng, T=60, d=4, K=2)
        spec = MethodSpec("edrvfl", NetworkConfig(n_hidden=8))
        best, cells = grid_search(spec, ds, GridSpec((-4, 0, 4), (1, 2, 3), (8,)), k=4, seed=0)
        top = max(c.mean_accuracy for c in cells)
        winners = [c for c in cells if c.mean_accuracy == top]
        first = sorted(winners, key=lambda c: (c.C_exponent, c.n_layers))[0]
        assert best.config.lam == 2.0 ** -first.C_exponent
        assert best.config.n_layers == first.n_layers

    def test_tie_order(self):
        dummy = EvalReport.from_folds("m", "d", [0.5])
        cells = [GridCell(4, 2, 100, dummy), GridCell(-2, 5, 100, dummy), GridCell(-2, 3, 100, dummy)]
        chosen = best_cell(cells)
        assert (chosen.C_exponent, chosen.n_layers) == (-2, 3)

    def test_shallow_grid_ignores_layers(self, rng):
        ds = random_dataset(rng, T=40, d=3, K=2)
        _, cells = grid_search(MethodSpec("rvfl"), ds, GridSpec((0, 2), (1, 2, 3), (5,)), k=4)
        assert len(cells) == 2 and {c.n_layers for c in cells} == {1}

    def test_failures_name_the_cell(self, rng):
        class Boom:
            method = "rvfl"

            def with_config(self, **kw):
                return self

            def fit(self, ds):
                raise ArithmeticError("bad")

        with pytest.raises(RuntimeError, match="C=2\\^0"):
            grid_search(Boom(), random_dataset(rng, T=20, d=2, K=2), GridSpec((0,), (1,), (5,)), k=2)


class TestLayerLambdas:
    def test_one_penalty_per_layer(self, rng):
        ds = random_dataset(rng, T=60, d=3, K=2)
        spec = MethodSpec("edrvfl", NetworkConfig(n_hidden=8, n_layers=3))
        tuned = tune_layer_lambdas(spec, ds, C_exponents=(-2, 4), k=3)
        lams = tuned.config.layer_lambdas
        assert len(lams) == 3 and set(lams) <= {4.0, 2.0 ** -4}


def test_nested_reports_per_fold_choices(rng):
    ds = random_dataset(rng, T=40, d=2, K=2)
    report = nested_cross_validate(MethodSpec("rvfl", NetworkConfig(n_hidden=5)), ds,
                                   GridSpec((0, 4), (1,), (5,)), k=3, inner_k=2)
    assert report.k == 3 and len(report.chosen_config["per_fold"]) == 3


def test_timing_nonnegative(toy):
    train_s, test_s = time_method(MethodSpec("rvfl", NetworkConfig(n_hidden=10)), toy)
    assert train_s >= 0 and test_s >= 0


def test_train_time_grows_with_depth(rng):
    ds = random_dataset(rng, T=300, d=10, K=2)

    def median_train(L):
        spec = MethodSpec("edrvfl", NetworkConfig(n_hidden=100, n_layers=L))
        return statistics.median(time_method(spec, ds)[0] for _ in range(5))

    t1, t5, t10 = (median_train(L) for L in (1, 5, 10))
    assert t1 < t5 < t10


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("RANDLINK_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("RANDLINK_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()
