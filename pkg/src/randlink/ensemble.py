"""Implicit and true ensembles of deep RVFL networks.

edRVFL runs one forward pass through a stack where every layer above the
first sees ``[previous hidden output, raw inputs]``. Each layer gets its own
independently solved output block over ``[H_l X]``, so an L-layer network
yields L ensemble members at the cost of L small solves.

TedRVFL is the explicit baseline: independent dRVFL models with consecutive
seeds whose scores are averaged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import NormalizationParams
from .deep import train_drvfl
from .shallow import (
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

__all__ = [
    "COMBINE_RULES",
    "EnsembleDeepModel",
    "TrueEnsemble",
    "ensemble_forward",
    "combine_scores",
    "train_edrvfl",
    "train_edsp_rvfl",
    "train_tedrvfl",
    "ensemble_predict",
]

COMBINE_RULES = ("majority_vote", "score_average")
_RULE_ALIASES = {"vote": "majority_vote", "average": "score_average"}


def _rule(rule):
    rule = _RULE_ALIASES.get(rule, rule)
    if rule not in COMBINE_RULES:
        raise ValueError(f"unknown combine rule {rule!r}; choose from {COMBINE_RULES}")
    return rule


def ensemble_forward(X, layers, direct_links=True):
    """Hidden outputs of an edRVFL stack; layers above the first take ``[H X]``."""
    X = np.asarray(X, dtype=np.float64)
    out = []
    inputs = X
    for layer in layers:
        H = layer.forward(inputs)
        out.append(H)
        inputs = np.hstack([H, X]) if direct_links else H
    return out


def combine_scores(member_scores, rule="majority_vote"):
    """Combine a list of ``(T, K)`` score matrices into labels.

    ``majority_vote``: each member votes for its argmax. A tie in vote count
    goes to the tied class with the highest mean score across members, then
    to the lowest class index. ``score_average``: argmax of the mean score.
    """
    rule = _rule(rule)
    S = np.stack([np.asarray(s, dtype=np.float64) for s in member_scores])
    if S.ndim != 3 or S.shape[0] < 1:
        raise ValueError("need at least one (T, K) score matrix of matching shape")
    mean = S.mean(axis=0)
    if rule == "score_average":
        return np.argmax(mean, axis=1)
    n_members, T, K = S.shape
    votes = np.zeros((T, K), dtype=np.int64)
    winners = np.argmax(S, axis=2)
    for m in range(n_members):
        votes[np.arange(T), winners[m]] += 1
    tied = votes == votes.max(axis=1, keepdims=True)
    # Among vote-tied classes pick the highest mean score; argmax breaks exact ties low.
    return np.argmax(np.where(tied, mean, -np.inf), axis=1)


@dataclass(frozen=True)
class EnsembleDeepModel:
    layers: tuple
    betas: tuple = field(repr=False)
    config: NetworkConfig
    norm_params: NormalizationParams
    direct_links: bool
    bias_column: bool
    combine_rule: str = "majority_vote"
    kind: str = "edrvfl"
    train_accuracy: float = float("nan")

    @property
    def n_features(self):
        return self.layers[0].n_in

    @property
    def n_classes(self):
        return self.betas[0].shape[1]

    def designs(self, X):
        """Per-member output designs ``[H_l X]`` (or ``[H_l 1]`` without direct links)."""
        Xn = self.norm_params.apply(_check_input(X, self.n_features))
        hidden = ensemble_forward(Xn, self.layers, self.direct_links)
        return [output_design([H], Xn, self.direct_links, self.bias_column) for H in hidden]

    def member_scores(self, X):
        return [D @ beta for D, beta in zip(self.designs(X), self.betas)]

    def scores(self, X):
        """Mean member score; what ``score_average`` takes the argmax of."""
        return np.mean(self.member_scores(X), axis=0)

    def predict(self, X, rule=None):
        return combine_scores(self.member_scores(X), rule or self.combine_rule)


def _fit_members(ds, cfg, layers, X, Y, params, combine_rule, kind):
    direct = cfg.direct_links
    bias = output_bias(cfg)
    hidden = ensemble_forward(X, layers, direct)
    betas = []
    member_scores = []
    for l, H in enumerate(hidden):
        D = output_design([H], X, direct, bias)
        beta = solve_output(D, Y, cfg.layer_lambda(l))
        betas.append(beta)
        member_scores.append(D @ beta)
    rule = _rule(combine_rule)
    train_acc = accuracy(combine_scores(member_scores, rule), ds.labels)
    return EnsembleDeepModel(
        tuple(layers), tuple(betas), cfg, params, direct, bias, rule, kind, train_acc
    )


def train_edrvfl(ds, cfg, combine_rule="majority_vote"):
    """Train an edRVFL with ``cfg.n_layers`` members.

    Layer weights are drawn from one generator seeded by ``cfg.seed``: layer 1
    is ``d x N``, higher layers are a single ``(N + d) x N`` block (``N x N``
    without direct links). ``cfg.layer_lambdas`` sets a penalty per member.
    """
    X, Y, params = prepare_training(ds, cfg)
    rng = np.random.default_rng(cfg.seed)
    d = X.shape[1]
    upper = cfg.n_hidden + d if cfg.direct_links else cfg.n_hidden
    layers = [layer_from_config(rng, d if l == 0 else upper, cfg) for l in range(cfg.n_layers)]
    kind = "edrvfl" if cfg.direct_links else "edrvfl-no-dl"
    return _fit_members(ds, cfg, layers, X, Y, params, combine_rule, kind)


def train_edsp_rvfl(ds, cfg, fcfg=None, combine_rule="majority_vote"):
    """edRVFL whose layers are each pretrained on that layer's own input."""
    fcfg = fcfg or FistaConfig()
    X, Y, params = prepare_training(ds, cfg)
    rng = np.random.default_rng(cfg.seed)
    layers = []
    inputs = X
    for _ in range(cfg.n_layers):
        layer, _ = pretrain_layer(inputs, rng, cfg, fcfg)
        layers.append(layer)
        H = layer.forward(inputs)
        inputs = np.hstack([H, X]) if cfg.direct_links else H
    return _fit_members(ds, cfg, layers, X, Y, params, combine_rule, "edsp-rvfl")


@dataclass(frozen=True)
class TrueEnsemble:
    members: tuple
    combine_rule: str = "score_average"
    kind: str = "tedrvfl"

    def __post_init__(self):
        if not self.members:
            raise ValueError("a true ensemble needs at least one member")
        shapes = {(m.beta.shape, len(m.layers)) for m in self.members}
        if len(shapes) != 1:
            raise ValueError("ensemble members must share one architecture")

    @property
    def config(self):
        return self.members[0].config

    @property
    def n_features(self):
        return self.members[0].n_features

    @property
    def n_classes(self):
        return self.members[0].n_classes

    def member_scores(self, X):
        return [m.scores(X) for m in self.members]

    def scores(self, X):
        return np.mean(self.member_scores(X), axis=0)

    def predict(self, X, rule=None):
        return combine_scores(self.member_scores(X), rule or self.combine_rule)


def train_tedrvfl(ds, cfg, member_count=None, base_seed=None, combine_rule="score_average"):
    """Train ``member_count`` dRVFL models with seeds ``base_seed + i``.

    ``member_count`` defaults to ``cfg.n_layers`` and ``base_seed`` to ``cfg.seed``.
    """
    member_count = cfg.n_layers if member_count is None else int(member_count)
    if member_count < 1:
        raise ValueError("member_count must be >= 1")
    base_seed = cfg.seed if base_seed is None else int(base_seed)
    members = tuple(
        train_drvfl(ds, cfg.replace(seed=base_seed + i)) for i in range(member_count)
    )
    return TrueEnsemble(members, _rule(combine_rule))


def ensemble_predict(model, X, rule=None):
    """Return ``(labels, per_member_scores)`` for an implicit or true ensemble."""
    member_scores = model.member_scores(X)
    return combine_scores(member_scores, rule or model.combine_rule), member_scores

