"""Sparse-autoencoder pretraining of hidden layers (SP-RVFL).

A random hidden map ``Ht = g(X W + b)`` is used to reconstruct its own input
under an l1 penalty::

    min_V ||Ht V - X||_F^2 + l1_weight * ||V||_1

solved with FISTA. The learned ``V`` (N x d) becomes the hidden weights
(transposed, d x N) and its row means become the hidden biases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix
from .shallow import (
    HiddenLayerParams,
    _fit_shallow,
    activation_fn,
    layer_from_config,
    output_bias,
    prepare_training,
)

__all__ = [
    "FistaConfig",
    "SparsePretrainResult",
    "fista_l1",
    "l1_objective",
    "soft_threshold",
    "lipschitz_constant",
    "sp_biases",
    "sp_hidden",
    "pretrain_layer",
    "train_sp_rvfl",
]

POWER_ITERATIONS = 50


@dataclass(frozen=True)
class FistaConfig:
    """``step_size=None`` derives the step from the Lipschitz constant."""

    l1_weight: float = 1.0
    max_iterations: int = 500
    tolerance: float = 1e-6
    step_size: float | None = None

    def __post_init__(self):
        if not self.l1_weight >= 0:
            raise ValueError(f"l1_weight must be >= 0, got {self.l1_weight}")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError(f"step size must be > 0, got {self.step_size}")

    def to_dict(self):
        return {
            "l1_weight": self.l1_weight,
            "max_iterations": int(self.max_iterations),
            "tolerance": self.tolerance,
            "step_size": self.step_size,
        }


@dataclass(frozen=True)
class SparsePretrainResult:
    varpi: np.ndarray = field(repr=False)
    b_hat: np.ndarray | None = field(default=None, repr=False)
    objective_trace: list = field(default_factory=list, repr=False)
    iterations: int = 0
    converged: bool = False


def soft_threshold(Z, t):
    return np.sign(Z) * np.maximum(np.abs(Z) - t, 0.0)


def l1_objective(A, V, B, l1_weight):
    R = A @ V - B
    return float(np.sum(R * R) + l1_weight * np.sum(np.abs(V)))


def lipschitz_constant(A, iterations=POWER_ITERATIONS):
    """``2 * s_max(A)^2`` with ``s_max`` from power iteration on ``A'A``."""
    A = np.asarray(A, dtype=np.float64)
    v = np.ones(A.shape[1]) / np.sqrt(A.shape[1])
    s2 = 0.0
    for _ in range(iterations):
        w = A.T @ (A @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        s2 = float(v @ w)
        v = w / norm
    # Rayleigh quotient of the final iterate.
    s2 = max(s2, float(np.linalg.norm(A @ v) ** 2))
    return 2.0 * s2


def fista_l1(A, B, cfg=None):
    """Minimize ``||A V - B||_F^2 + l1_weight ||V||_1`` by FISTA.

    Columns of ``B`` are independent problems. Each column stops on its own
    once ``max|V_k - Y_k| / step`` (the gradient-mapping magnitude of its
    last proximal step) drops below ``cfg.tolerance``, so solving the
    columns jointly or one at a time gives the same answer.

    Returns a :class:`SparsePretrainResult` with ``b_hat`` unset; the
    objective trace holds the summed objective at ``V = 0`` and after every
    iteration.
    """
    cfg = cfg or FistaConfig()
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"row mismatch: A has {A.shape[0]} rows, B has {B.shape[0]}")

    if cfg.step_size is None:
        lip = lipschitz_constant(A)
        if lip == 0.0:
            raise ValueError("zero step size: A has no nonzero singular value")
        step = 1.0 / lip
    else:
        step = float(cfg.step_size)
    thresh = cfg.l1_weight * step

    n, k = A.shape[1], B.shape[1]
    V = np.zeros((n, k))
    Yk = V.copy()
    t = 1.0
    active = np.ones(k, dtype=bool)
    AtB = A.T @ B
    AtA = A.T @ A
    trace = [l1_objective(A, V, B, cfg.l1_weight)]
    it = 0
    for it in range(1, int(cfg.max_iterations) + 1):
        cols = np.flatnonzero(active)
        Yc = Yk[:, cols]
        grad = 2.0 * (AtA @ Yc - AtB[:, cols])
        V_new = soft_threshold(Yc - step * grad, thresh)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        change = np.max(np.abs(V_new - Yc), axis=0) / step
        Yk[:, cols] = V_new + ((t - 1.0) / t_new) * (V_new - V[:, cols])
        V[:, cols] = V_new
        t = t_new
        trace.append(l1_objective(A, V, B, cfg.l1_weight))
        done = change < cfg.tolerance
        Yk[:, cols[done]] = V[:, cols[done]]
        active[cols[done]] = False
        if not active.any():
            break
    return SparsePretrainResult(V, None, trace, it, not active.any())


def sp_biases(varpi):
    """Hidden biases: the mean of each row of the autoencoder weights."""
    V = np.asarray(varpi, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] < 1:
        raise ValueError(f"varpi must be 2-D with at least one column, got shape {V.shape}")
    return V.sum(axis=1) / V.shape[1]


def sp_hidden(X, varpi, b_hat, activation="sigmoid"):
    """``g(X V' + b_hat)``: V is N x d, so it is transposed to map d -> N."""
    X = np.asarray(X, dtype=np.float64)
    V = np.asarray(varpi, dtype=np.float64)
    b_hat = np.asarray(b_hat, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or V.ndim != 2 or X.shape[1] != V.shape[1] or b_hat.shape[0] != V.shape[0]:
        raise ValueError(
            f"shape mismatch: X {X.shape}, varpi {V.shape}, b_hat {b_hat.shape}"
        )
    return activation_fn(activation)(X @ V.T + b_hat)


def pretrain_layer(inputs, rng, cfg, fcfg):
    """Learn one hidden layer from ``inputs`` with the sparse autoencoder.

    The random map consumes ``rng`` exactly as a plain random layer would.
    """
    probe = layer_from_config(rng, inputs.shape[1], cfg)
    result = fista_l1(probe.forward(inputs), inputs, fcfg)
    b_hat = sp_biases(result.varpi)
    return HiddenLayerParams(result.varpi.T, b_hat, cfg.activation), result


def train_sp_rvfl(ds, cfg, fcfg=None):
    """Shallow RVFL whose hidden layer comes from sparse pretraining."""
    fcfg = fcfg or FistaConfig()
    if cfg.n_layers != 1:
        raise ValueError(f"shallow models need n_layers == 1, got {cfg.n_layers}")
    X, _, _ = prepare_training(ds, cfg)
    layer, _ = pretrain_layer(X, np.random.default_rng(cfg.seed), cfg, fcfg)
    return _fit_shallow(ds, cfg, layer, cfg.direct_links, output_bias(cfg), "sp-rvfl")
