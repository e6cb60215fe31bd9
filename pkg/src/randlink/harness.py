"""Cross-validation, grid search and timing for the benchmark protocol.

Every fold trains on its training rows only: models fit their own
normalization inside ``fit``, so test rows never reach a training routine.
Fold plans come from ``seed``; model randomness comes from the method's own
config seed, so results do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import dataclasses
import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import stratified_kfold
from .methods import is_shallow
from .shallow import accuracy

__all__ = [
    "EvalReport",
    "GridSpec",
    "GridCell",
    "best_cell",
    "cross_validate",
    "grid_search",
    "nested_cross_validate",
    "tune_layer_lambdas",
    "time_method",
    "worker_count",
]

THREADS_ENV = "RANDLINK_THREADS"


def worker_count(default=1):
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class EvalReport:
    method: str
    dataset: str
    fold_accuracies: tuple
    mean_accuracy: float
    std_accuracy: float
    train_seconds: float = 0.0
    test_seconds: float = 0.0
    chosen_config: dict | None = None
    seed: int = 0

    @property
    def k(self):
        return len(self.fold_accuracies)

    @classmethod
    def from_folds(cls, method, dataset, fold_accuracies, **kwargs):
        """Build a report; ``std_accuracy`` is the population standard deviation."""
        acc = np.asarray(fold_accuracies, dtype=np.float64)
        return cls(method, dataset, tuple(float(a) for a in acc), float(acc.mean()),
                   float(acc.std()), **kwargs)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["fold_accuracies"] = list(self.fold_accuracies)
        d["k"] = self.k
        return d

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        kwargs = {key: v for key, v in d.items() if key in names}
        kwargs["fold_accuracies"] = tuple(kwargs["fold_accuracies"])
        return cls(**kwargs)


@dataclass(frozen=True)
class GridSpec:
    C_exponents: tuple = tuple(range(-6, 13, 2))
    L_values: tuple = tuple(range(1, 11))
    N_values: tuple = (100,)

    def __post_init__(self):
        for name in ("C_exponents", "L_values", "N_values"):
            values = tuple(int(v) for v in getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, values)

    def cells(self, shallow=False):
        """``(C_exponent, L, N)`` triples in search order; shallow methods use L = 1 only."""
        Ls = (1,) if shallow else self.L_values
        return list(itertools.product(self.C_exponents, Ls, self.N_values))

    def size(self, shallow=False):
        return len(self.cells(shallow))


@dataclass(frozen=True)
class GridCell:
    C_exponent: int
    n_layers: int
    n_hidden: int
    report: EvalReport = field(repr=False)

    @property
    def C(self):
        return 2.0 ** self.C_exponent

    @property
    def mean_accuracy(self):
        return self.report.mean_accuracy


def _spec_name(spec):
    return getattr(spec, "name", type(spec).__name__)


def _spec_config(spec):
    cfg = getattr(spec, "config", None)
    return cfg.to_dict() if cfg is not None else None


def cross_validate(method_spec, ds, k=10, seed=0, plan=None, workers=None):
    """k-fold stratified cross-validation of ``method_spec`` on ``ds``.

    ``method_spec`` needs ``fit(Dataset)`` returning a model with ``predict(X)``.
    Timings are the mean wall-clock seconds per fold.
    """
    plan = plan or stratified_kfold(ds, k, seed)
    workers = worker_count() if workers is None else workers

    def run_fold(f):
        train_idx, test_idx = plan.train_indices(f), plan.test_indices(f)
        t0 = time.perf_counter()
        model = method_spec.fit(ds.subset(train_idx))
        t1 = time.perf_counter()
        labels = model.predict(ds.features[test_idx])
        t2 = time.perf_counter()
        return accuracy(labels, ds.labels[test_idx]), t1 - t0, t2 - t1

    results = _pmap(run_fold, range(plan.k), workers)
    accs = [r[0] for r in results]
    return EvalReport.from_folds(
        _spec_name(method_spec),
        ds.name,
        accs,
        train_seconds=float(np.mean([r[1] for r in results])),
        test_seconds=float(np.mean([r[2] for r in results])),
        chosen_config=_spec_config(method_spec),
        seed=int(seed),
    )


def best_cell(cells):
    # Highest mean, then smaller C, smaller L, smaller N.
    return min(cells, key=lambda c: (-c.mean_accuracy, c.C_exponent, c.n_layers, c.n_hidden))


def grid_search(method_spec, ds, grid=None, k=10, seed=0, workers=None):
    """Cross-validate every grid cell; returns ``(best_spec, cells)``.

    Each cell sets ``lam = 1 / 2**C_exponent``, ``n_layers`` and ``n_hidden``
    on ``method_spec.config``. All cells share one fold plan.
    """
    grid = grid or GridSpec()
    plan = stratified_kfold(ds, k, seed)
    workers = worker_count() if workers is None else workers
    shallow = is_shallow(getattr(method_spec, "method", ""))

    def run_cell(cell):
        c, L, N = cell
        spec = method_spec.with_config(lam=2.0 ** -c, n_layers=L, n_hidden=N, layer_lambdas=None)
        try:
            report = cross_validate(spec, ds, k, seed, plan=plan, workers=1)
        except Exception as exc:
            raise RuntimeError(f"grid cell C=2^{c}, L={L}, N={N} failed: {exc}") from exc
        return GridCell(c, L, N, report)

    cells = _pmap(run_cell, grid.cells(shallow), workers)
    best = best_cell(cells)
    best_spec = method_spec.with_config(
        lam=2.0 ** -best.C_exponent, n_layers=best.n_layers, n_hidden=best.n_hidden,
        layer_lambdas=None,
    )
    return best_spec, cells


def tune_layer_lambdas(method_spec, ds, C_exponents=None, k=10, seed=0, workers=None):
    """Pick a separate penalty for each member of an implicit ensemble.

    A member's output block depends only on its own penalty, so one fit per
    (C, fold) with a shared penalty scores every member under that C. Each
    layer keeps the C with the best mean held-out accuracy of that member
    alone (ties go to the smaller C). Returns a spec with ``layer_lambdas`` set.
    """
    C_exponents = tuple(C_exponents or GridSpec().C_exponents)
    plan = stratified_kfold(ds, k, seed)
    workers = worker_count() if workers is None else workers
    L = method_spec.config.n_layers

    def run(job):
        c, f = job
        spec = method_spec.with_config(lam=2.0 ** -c, layer_lambdas=None)
        test_idx = plan.test_indices(f)
        model = spec.fit(ds.subset(plan.train_indices(f)))
        scores = model.member_scores(ds.features[test_idx])
        return [accuracy(np.argmax(s, axis=1), ds.labels[test_idx]) for s in scores]

    jobs = list(itertools.product(C_exponents, range(plan.k)))
    acc = np.array(_pmap(run, jobs, workers)).reshape(len(C_exponents), plan.k, L)
    member_means = acc.mean(axis=1)
    chosen = []
    for l in range(L):
        order = sorted(range(len(C_exponents)), key=lambda i: (-member_means[i, l], C_exponents[i]))
        chosen.append(2.0 ** -C_exponents[order[0]])
    return method_spec.with_config(layer_lambdas=tuple(chosen))


def nested_cross_validate(method_spec, ds, grid=None, k=10, seed=0, inner_k=None, workers=None):
    """Outer k-fold estimate with an inner grid search on each training split."""
    grid = grid or GridSpec()
    inner_k = inner_k or k
    plan = stratified_kfold(ds, k, seed)
    accs, chosen, train_s, test_s = [], [], [], []
    for f in range(plan.k):
        train = ds.subset(plan.train_indices(f))
        test_idx = plan.test_indices(f)
        t0 = time.perf_counter()
        best, _ = grid_search(method_spec, train, grid, inner_k, seed, workers)
        model = best.fit(train)
        t1 = time.perf_counter()
        labels = model.predict(ds.features[test_idx])
        t2 = time.perf_counter()
        accs.append(accuracy(labels, ds.labels[test_idx]))
        chosen.append(best.config.to_dict())
        train_s.append(t1 - t0)
        test_s.append(t2 - t1)
    return EvalReport.from_folds(
        _spec_name(method_spec), ds.name, accs,
        train_seconds=float(np.mean(train_s)), test_seconds=float(np.mean(test_s)),
        chosen_config={"per_fold": chosen}, seed=int(seed),
    )


def time_method(method_spec, ds):
    """Wall-clock seconds for one full training pass and one full prediction pass."""
    t0 = time.perf_counter()
    model = method_spec.fit(ds)
    t1 = time.perf_counter()
    model.predict(ds.features)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1
