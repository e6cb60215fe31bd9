"""Small synthetic classification problems for tests and demos."""

from __future__ import annotations

import numpy as np

from .data import Dataset


def make_spirals(n_samples=500, turns=1.5, noise=0.05, seed=0):
    """Two interleaved Archimedean spirals in the plane, classes 0 and 1."""
    rng = np.random.default_rng(seed)
    n0 = n_samples // 2
    counts = (n0, n_samples - n0)
    X, y = [], []
    for cls, n in enumerate(counts):
        t = np.sqrt(rng.uniform(0.0, 1.0, n)) * turns * 2.0 * np.pi
        r = t / (turns * 2.0 * np.pi)
        angle = t + cls * np.pi
        pts = np.column_stack([r * np.cos(angle), r * np.sin(angle)])
        X.append(pts + rng.normal(0.0, noise, pts.shape))
        y.append(np.full(n, cls))
    return Dataset(np.vstack(X), np.concatenate(y), 2, "spirals")


def make_blobs(n_samples=100, n_features=2, n_classes=2, spread=0.3, seed=0):
    """Gaussian clusters with centres drawn uniformly in ``[-2, 2]^d``."""
    rng = np.random.default_rng(seed)
    centres = rng.uniform(-2.0, 2.0, size=(n_classes, n_features))
    y = np.arange(n_samples) % n_classes
    X = centres[y] + rng.normal(0.0, spread, size=(n_samples, n_features))
    return Dataset(X, y, n_classes, "blobs")
