"""Single-hidden-layer randomized networks: RVFL and ELM.

Both draw a random hidden layer ``H = g(XW + b)`` that is never trained and
solve the output weights in closed form. RVFL feeds the raw inputs to the
output layer alongside ``H`` (direct links); ELM uses ``H`` alone.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, NormalizationParams, fit_normalization, one_hot
from .linalg import RidgeMode, pinv_solve, ridge_solve, sigmoid

__all__ = [
    "ACTIVATIONS",
    "NetworkConfig",
    "HiddenLayerParams",
    "ShallowModel",
    "random_layer",
    "train_rvfl",
    "train_elm",
    "predict",
    "accuracy",
]


def _identity(M):
    return np.asarray(M, dtype=np.float64)


ACTIVATIONS = {
    "sigmoid": sigmoid,
    "tanh": np.tanh,
    "relu": lambda M: np.maximum(M, 0.0),
    "identity": _identity,
}


def activation_fn(name):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}; choose from {sorted(ACTIVATIONS)}") from None


@dataclass(frozen=True)
class NetworkConfig:
    """Hyperparameters shared by every network in the package.

    ``lam`` is the ridge penalty (1/C). ``layer_lambdas`` optionally overrides
    it per layer for models that solve one output block per layer.
    """

    n_hidden: int = 100
    n_layers: int = 1
    lam: float = 1.0
    direct_links: bool = True
    bias_in_output: bool = False
    hidden_bias: bool = True
    activation: str = "sigmoid"
    seed: int = 0
    weight_range: tuple = (-1.0, 1.0)
    bias_range: tuple = (0.0, 1.0)
    normalization: str = "minmax"
    layer_lambdas: tuple | None = None

    def __post_init__(self):
        if int(self.n_hidden) < 1:
            raise ValueError(f"n_hidden must be >= 1, got {self.n_hidden}")
        if int(self.n_layers) < 1:
            raise ValueError(f"n_layers must be >= 1, got {self.n_layers}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        activation_fn(self.activation)
        for name in ("weight_range", "bias_range"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not lo < hi:
                raise ValueError(f"{name} must satisfy lo < hi, got {(lo, hi)}")
            object.__setattr__(self, name, (lo, hi))
        if self.layer_lambdas is not None:
            lams = tuple(float(v) for v in self.layer_lambdas)
            if len(lams) != self.n_layers or any(v < 0 or not np.isfinite(v) for v in lams):
                raise ValueError("layer_lambdas needs one finite value >= 0 per layer")
            object.__setattr__(self, "layer_lambdas", lams)
        object.__setattr__(self, "n_hidden", int(self.n_hidden))
        object.__setattr__(self, "n_layers", int(self.n_layers))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_C(cls, C, **kwargs):
        return cls(lam=1.0 / C, **kwargs)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def layer_lambda(self, l):
        return self.lam if self.layer_lambdas is None else self.layer_lambdas[l]

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["weight_range"] = list(self.weight_range)
        d["bias_range"] = list(self.bias_range)
        if self.layer_lambdas is not None:
            d["layer_lambdas"] = list(self.layer_lambdas)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("weight_range", "bias_range", "layer_lambdas"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class HiddenLayerParams:
    W: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    activation: str = "sigmoid"

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64, order="C")
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        if W.ndim != 2 or b.shape[0] != W.shape[1]:
            raise ValueError(f"bias length {b.shape[0]} does not match W shape {W.shape}")
        W.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        activation_fn(self.activation)

    @property
    def n_in(self):
        return self.W.shape[0]

    @property
    def n_out(self):
        return self.W.shape[1]

    def forward(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_in:
            raise ValueError(f"layer expects {self.n_in} input columns, got shape {X.shape}")
        return activation_fn(self.activation)(X @ self.W + self.b)


def _draw_layer(rng, d_in, n, weight_range, bias_range, activation="sigmoid", bias=True):
    W = rng.uniform(weight_range[0], weight_range[1], size=(d_in, n))
    b = rng.uniform(bias_range[0], bias_range[1], size=n) if bias else np.zeros(n)
    return HiddenLayerParams(W, b, activation)


def random_layer(d_in, n, seed, weight_range=(-1.0, 1.0), bias_range=(0.0, 1.0),
                 activation="sigmoid", bias=True):
    """Draw a fixed random hidden layer with uniform weights and biases.

    ``seed`` may be an int or a ``numpy.random.Generator``; a generator is
    advanced in place, which is how multi-layer models share one stream.
    """
    for name, (lo, hi) in (("weight_range", weight_range), ("bias_range", bias_range)):
        if not float(lo) < float(hi):
            raise ValueError(f"{name} must satisfy lo < hi, got {(lo, hi)}")
    rng = np.random.default_rng(seed)
    return _draw_layer(rng, int(d_in), int(n), weight_range, bias_range, activation, bias)


def layer_from_config(rng, d_in, cfg):
    return _draw_layer(rng, d_in, cfg.n_hidden, cfg.weight_range, cfg.bias_range,
                       cfg.activation, cfg.hidden_bias)


def output_design(hidden, X, direct_links, bias):
    """Stack hidden blocks, then raw inputs, then a constant column, left to right."""
    blocks = list(hidden)
    if direct_links:
        blocks.append(X)
    if bias:
        blocks.append(np.ones((X.shape[0], 1)))
    return np.hstack(blocks)


def output_bias(cfg):
    # Variants without direct links keep a bias column in the output layer.
    return cfg.bias_in_output or not cfg.direct_links


def solve_output(D, Y, lam):
    beta = pinv_solve(D, Y) if lam == 0.0 else ridge_solve(D, Y, lam, RidgeMode.AUTO)
    # C order keeps D @ beta on the same BLAS path after a save/load round-trip.
    return np.ascontiguousarray(beta)


def accuracy(labels, truth):
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    return float(np.count_nonzero(labels == truth)) / truth.shape[0]


def prepare_training(ds, cfg):
    """Fit normalization on ``ds`` and return ``(X, Y, params)``."""
    if not isinstance(ds, Dataset):
        raise TypeError("expected a Dataset")
    params = fit_normalization(ds.features, cfg.normalization)
    return params.apply(ds.features), one_hot(ds.labels, ds.class_count), params


@dataclass(frozen=True)
class ShallowModel:
    layer: HiddenLayerParams
    beta: np.ndarray = field(repr=False)
    config: NetworkConfig
    norm_params: NormalizationParams
    direct_links: bool
    bias_column: bool
    kind: str = "rvfl"
    train_accuracy: float = float("nan")

    @property
    def n_features(self):
        return self.layer.n_in

    @property
    def n_classes(self):
        return self.beta.shape[1]

    def design(self, X):
        Xn = self.norm_params.apply(_check_input(X, self.n_features))
        return output_design([self.layer.forward(Xn)], Xn, self.direct_links, self.bias_column)

    def scores(self, X):
        return self.design(X) @ self.beta

    def predict(self, X):
        return np.argmax(self.scores(X), axis=1)


def _check_input(X, d):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(f"model expects {d} feature columns, got shape {X.shape}")
    return X


def _fit_shallow(ds, cfg, layer, direct_links, bias_column, kind, rng=None):
    if cfg.n_layers != 1:
        raise ValueError(f"shallow models need n_layers == 1, got {cfg.n_layers}")
    X, Y, params = prepare_training(ds, cfg)
    if layer is None:
        rng = np.random.default_rng(cfg.seed) if rng is None else rng
        layer = layer_from_config(rng, X.shape[1], cfg)
    elif layer.n_in != X.shape[1]:
        raise ValueError(f"layer expects {layer.n_in} inputs, dataset has {X.shape[1]}")
    D = output_design([layer.forward(X)], X, direct_links, bias_column)
    beta = solve_output(D, Y, cfg.lam)
    train_acc = accuracy(np.argmax(D @ beta, axis=1), ds.labels)
    return ShallowModel(layer, beta, cfg, params, direct_links, bias_column, kind, train_acc)


def train_rvfl(ds, cfg, layer=None):
    """Train a shallow RVFL.

    The output design is ``[H X]`` with direct links, ``[H 1]`` without, plus a
    trailing constant column when ``cfg.bias_in_output`` is set. ``layer``
    replaces the random hidden layer (used by pretrained variants and tests).
    """
    return _fit_shallow(ds, cfg, layer, cfg.direct_links, output_bias(cfg), "rvfl")


def train_elm(ds, cfg, layer=None):
    """Train an ELM: output weights are solved on the hidden features only."""
    return _fit_shallow(ds, cfg, layer, False, False, "elm")


def predict(model, X):
    """Return ``(labels, scores)``; ties in a score row go to the lowest class index."""
    scores = model.scores(X)
    return np.argmax(scores, axis=1), scores
