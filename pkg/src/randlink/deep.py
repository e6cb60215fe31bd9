"""Deep RVFL: a stack of fixed random layers read out by one ridge solve.

Layer 1 maps the inputs, every later layer maps the previous layer's output
only. The output layer sees every hidden block plus the raw inputs, so the
single output weight matrix has ``N * L + d`` rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import NormalizationParams
from .shallow import (
    HiddenLayerParams,
    NetworkConfig,
    _check_input,
    accuracy,
    layer_from_config,
    output_bias,
    output_design,
    prepare_training,
    solve_output,
)
from .sparse import FistaConfig, pretrain_layer

__all__ = ["DeepModel", "forward_stack", "train_drvfl", "train_dsp_rvfl", "predict_deep"]


def forward_stack(X, layers, activation=None):
    """Run the chain ``H1 = g(X W1 + b1)``, ``Hl = g(H(l-1) Wl + bl)``.

    ``activation`` overrides the activation stored on each layer.
    """
    H = np.asarray(X, dtype=np.float64)
    out = []
    for layer in layers:
        if activation is not None and activation != layer.activation:
            layer = HiddenLayerParams(layer.W, layer.b, activation)
        H = layer.forward(H)
        out.append(H)
    return out


@dataclass(frozen=True)
class DeepModel:
    layers: tuple
    beta: np.ndarray = field(repr=False)
    config: NetworkConfig
    norm_params: NormalizationParams
    direct_links: bool
    bias_column: bool
    kind: str = "drvfl"
    train_accuracy: float = float("nan")

    @property
    def n_features(self):
        return self.layers[0].n_in

    @property
    def n_classes(self):
        return self.beta.shape[1]

    def design(self, X):
        Xn = self.norm_params.apply(_check_input(X, self.n_features))
        return output_design(forward_stack(Xn, self.layers), Xn, self.direct_links, self.bias_column)

    def scores(self, X):
        return self.design(X) @ self.beta

    def predict(self, X):
        return np.argmax(self.scores(X), axis=1)


def _fit_deep(ds, cfg, layers, X, Y, params, kind):
    direct = cfg.direct_links
    bias = output_bias(cfg)
    D = output_design(forward_stack(X, layers), X, direct, bias)
    beta = solve_output(D, Y, cfg.lam)
    train_acc = accuracy(np.argmax(D @ beta, axis=1), ds.labels)
    return DeepModel(tuple(layers), beta, cfg, params, direct, bias, kind, train_acc)


def train_drvfl(ds, cfg):
    """Train a dRVFL with ``cfg.n_layers`` random layers of ``cfg.n_hidden`` nodes.

    Without direct links (the "-O" ablation) the raw inputs are dropped from
    the output design and a constant column is added instead.
    """
    X, Y, params = prepare_training(ds, cfg)
    rng = np.random.default_rng(cfg.seed)
    layers = []
    width = X.shape[1]
    for _ in range(cfg.n_layers):
        layers.append(layer_from_config(rng, width, cfg))
        width = cfg.n_hidden
    kind = "drvfl" if cfg.direct_links else "drvfl-no-dl"
    return _fit_deep(ds, cfg, layers, X, Y, params, kind)


def train_dsp_rvfl(ds, cfg, fcfg=None):
    """dRVFL whose layers are each pretrained on that layer's own input."""
    fcfg = fcfg or FistaConfig()
    X, Y, params = prepare_training(ds, cfg)
    rng = np.random.default_rng(cfg.seed)
    layers = []
    H = X
    for _ in range(cfg.n_layers):
        layer, _ = pretrain_layer(H, rng, cfg, fcfg)
        layers.append(layer)
        H = layer.forward(H)
    return _fit_deep(ds, cfg, layers, X, Y, params, "dsp-rvfl")


def predict_deep(model, X):
    scores = model.scores(X)
    return np.argmax(scores, axis=1), scores
