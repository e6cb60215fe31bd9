import numpy as np
import pytest

from randlink.data import Dataset


def separable_toy(seed=0):
    """40 points in 2-D, two classes split by a margin around x0 + x1 = 0."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(200, 2))
    s = X.sum(axis=1)
    keep = np.abs(s) > 0.3
    X = X[keep][:40]
    y = (X.sum(axis=1) > 0).astype(int)
    return Dataset(X, y, 2, "toy")


@pytest.fixture
def toy():
    return separable_toy()


def random_dataset(rng, T=None, d=None, K=None):
    T = T or int(rng.integers(20, 201))
    d = d or int(rng.integers(1, 21))
    K = K or int(rng.integers(2, 5))
    X = rng.normal(size=(T, d))
    y = np.arange(T) % K
    rng.shuffle(y)
    return Dataset(X, y, K, "random")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
