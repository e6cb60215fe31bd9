"""Dataset loading, feature normalization, target encoding and fold plans."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dataset",
    "NormalizationParams",
    "FoldPlan",
    "load_csv",
    "write_csv",
    "fit_normalization",
    "normalize",
    "one_hot",
    "stratified_kfold",
]

NORMALIZATION_METHODS = ("minmax", "zscore", "none")


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    name: str = "dataset"
    class_names: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"features must be a non-empty 2-D array, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain non-finite values")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("labels must be 1-D with one entry per feature row")
        if y.size and not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise ValueError("labels must be integer class ids")
        y = y.astype(np.int64)
        K = int(self.class_count)
        if K < 1 or y.min() < 0 or y.max() >= K:
            raise ValueError(f"labels must lie in [0, {K})")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_count", K)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def subset(self, idx):
        """Rows ``idx`` as a new Dataset sharing the class space."""
        idx = np.asarray(idx)
        return Dataset(
            self.features[idx], self.labels[idx], self.class_count, self.name, self.class_names
        )


def _parse_float(cell, row_no, col_no):
    try:
        value = float(cell)
    except ValueError:
        raise ValueError(
            f"non-numeric feature cell {cell!r} at row {row_no}, column {col_no}"
        ) from None
    if not np.isfinite(value):
        raise ValueError(f"non-finite feature cell {cell!r} at row {row_no}, column {col_no}")
    return value


def load_csv(path, label_column=-1, has_header=False, name=None):
    """Read a comma-separated numeric table with one label column.

    Labels are kept as text and remapped to dense ids ``0..K-1`` in order of
    first appearance. ``label_column`` is a 0-based index (negative counts
    from the end) or, when ``has_header`` is set, a header name.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]

    header = None
    if has_header:
        if not rows:
            raise ValueError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"{path}: ragged row {i}: expected {width} cells, found {len(r)}")
    if width < 2:
        raise ValueError(f"{path}: need at least one feature column and a label column")

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None:
            raise ValueError("label column given by name but the file has no header")
        if label_column not in header:
            raise ValueError(f"label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise ValueError(f"label column index {label_idx} out of range for {width} columns")
        label_idx %= width

    codes = {}
    labels = []
    features = []
    for i, r in enumerate(rows):
        raw = r[label_idx].strip()
        labels.append(codes.setdefault(raw, len(codes)))
        features.append(
            [_parse_float(c, i, j) for j, c in enumerate(r) if j != label_idx]
        )
    if len(codes) < 2:
        raise ValueError(f"{path}: dataset has a single class")

    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return Dataset(
        np.array(features, dtype=np.float64),
        np.array(labels, dtype=np.int64),
        len(codes),
        name,
        tuple(codes),
    )


def write_csv(path, ds, header=None):
    """Write features followed by the label column; floats use repr for exact round-trip."""
    names = ds.class_names or tuple(str(i) for i in range(ds.class_count))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for x, y in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [names[y]])


@dataclass(frozen=True)
class NormalizationParams:
    """Per-column affine map ``(x - shift) * scale`` fitted on training rows."""

    method: str
    shift: np.ndarray = field(repr=False)
    scale: np.ndarray = field(repr=False)

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.shift.shape[0]:
            raise ValueError(
                f"normalization expects {self.shift.shape[0]} columns, got shape {X.shape}"
            )
        if self.method == "none":
            return X
        return (X - self.shift) * self.scale


def fit_normalization(X, method="minmax"):
    """Fit column statistics on ``X``; constant columns map to 0."""
    if method not in NORMALIZATION_METHODS:
        raise ValueError(f"unknown normalization {method!r}; choose from {NORMALIZATION_METHODS}")
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if method == "none":
        return NormalizationParams("none", np.zeros(d), np.ones(d))
    if method == "minmax":
        shift = X.min(axis=0)
        spread = X.max(axis=0) - shift
    else:
        shift = X.mean(axis=0)
        spread = X.std(axis=0)
    scale = np.zeros(d)
    nz = spread > 0
    scale[nz] = 1.0 / spread[nz]
    return NormalizationParams(method, shift, scale)


def normalize(ds, method="minmax"):
    """Normalize a dataset; returns ``(normalized_dataset, params)``."""
    params = fit_normalization(ds.features, method)
    out = Dataset(params.apply(ds.features), ds.labels, ds.class_count, ds.name, ds.class_names)
    return out, params


def one_hot(labels, K):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError("labels must be 1-D")
    if labels.size and (labels.min() < 0 or labels.max() >= K):
        raise ValueError(f"label out of range [0, {K})")
    Y = np.zeros((labels.size, K))
    Y[np.arange(labels.size), labels] = 1.0
    return Y


@dataclass(frozen=True)
class FoldPlan:
    fold_of_sample: np.ndarray
    k: int
    seed: int

    def test_indices(self, fold):
        return np.flatnonzero(self.fold_of_sample == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.fold_of_sample != fold)

    def splits(self):
        """Yield ``(train_idx, test_idx)`` for each fold in order."""
        for f in range(self.k):
            yield self.train_indices(f), self.test_indices(f)

    def fold_sizes(self):
        return np.bincount(self.fold_of_sample, minlength=self.k)


def stratified_kfold(ds, k=10, seed=0):
    """Assign every sample to one of ``k`` folds, stratified by class.

    Each class is shuffled, the classes are laid end to end, and positions are
    dealt round-robin. That keeps both total fold sizes and per-class counts
    within one of each other.
    """
    labels = ds.labels if isinstance(ds, Dataset) else np.asarray(ds, dtype=np.int64)
    T = labels.shape[0]
    k = int(k)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > T:
        raise ValueError(f"k={k} exceeds the number of samples {T}")
    rng = np.random.default_rng(seed)
    order = np.concatenate(
        [rng.permutation(np.flatnonzero(labels == c)) for c in np.unique(labels)]
    )
    folds = np.empty(T, dtype=np.int64)
    folds[order] = np.arange(T) % k
    return FoldPlan(folds, k, int(seed))
