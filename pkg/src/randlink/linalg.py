"""Closed-form ridge and pseudoinverse solvers shared by every model.

Matrices are plain ``float64`` numpy arrays. Solvers never form an explicit
inverse: the regularized Gram (or kernel) matrix is symmetric positive
definite and is handed to a Cholesky-based solve.
"""

from __future__ import annotations

import enum

import numpy as np
import scipy.linalg
from scipy.special import expit

__all__ = [
    "RidgeMode",
    "as_matrix",
    "ridge_solve",
    "pinv_solve",
    "sigmoid",
    "PINV_RCOND",
]

# Relative singular-value cutoff, scaled by max(T, p).
PINV_RCOND = 1e-12


class RidgeMode(str, enum.Enum):
    AUTO = "auto"
    PRIMAL = "primal"
    DUAL = "dual"
    PINV = "pinv"


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float64 array.

    1-D input is treated as a single column.
    """
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite values")
    return m


def _check_rows(D, Y):
    if D.shape[0] != Y.shape[0]:
        raise ValueError(
            f"row mismatch: design has {D.shape[0]} rows, targets have {Y.shape[0]}"
        )


def pinv_solve(D, Y):
    """Minimum-norm least-squares solution ``D^+ Y`` via a thin SVD.

    Singular values below ``max(T, p) * s_max * 1e-12`` are treated as zero.
    """
    D = as_matrix(D, "D")
    Y = as_matrix(Y, "Y")
    _check_rows(D, Y)
    U, s, Vt = np.linalg.svd(D, full_matrices=False)
    cutoff = max(D.shape) * s[0] * PINV_RCOND if s.size else 0.0
    keep = s > cutoff
    if not np.any(keep):
        return np.zeros((D.shape[1], Y.shape[1]))
    inv_s = 1.0 / s[keep]
    return Vt[keep].T @ (inv_s[:, None] * (U[:, keep].T @ Y))


def ridge_solve(D, Y, lam, mode=RidgeMode.AUTO):
    """Solve ``min ||D beta - Y||^2 + lam ||beta||^2`` in closed form.

    Parameters
    ----------
    D : array_like, shape (T, p)
        Design matrix.
    Y : array_like, shape (T, K)
        Targets.
    lam : float
        Ridge penalty. Must be positive for the primal and dual forms.
    mode : RidgeMode or str
        ``primal`` solves the p x p system ``(D'D + lam I) beta = D'Y``;
        ``dual`` solves the T x T system and maps back through ``D'``;
        ``auto`` picks primal when ``p <= T``; ``pinv`` ignores ``lam``.

    Returns
    -------
    ndarray, shape (p, K)
    """
    mode = RidgeMode(mode)
    D = as_matrix(D, "D")
    Y = as_matrix(Y, "Y")
    _check_rows(D, Y)
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")

    if mode is RidgeMode.PINV:
        return pinv_solve(D, Y)
    if mode is RidgeMode.AUTO:
        if lam == 0.0:
            return pinv_solve(D, Y)
        mode = RidgeMode.PRIMAL if D.shape[1] <= D.shape[0] else RidgeMode.DUAL
    if lam == 0.0:
        raise ValueError(f"lambda == 0 is not allowed in {mode.value} mode; use pinv")

    if mode is RidgeMode.PRIMAL:
        G = D.T @ D
        G[np.diag_indices_from(G)] += lam
        return scipy.linalg.solve(G, D.T @ Y, assume_a="pos", check_finite=False)
    K = D @ D.T
    K[np.diag_indices_from(K)] += lam
    alpha = scipy.linalg.solve(K, Y, assume_a="pos", check_finite=False)
    return D.T @ alpha


def sigmoid(M):
    """Logistic function 1 / (1 + exp(-x)), overflow-safe."""
    return expit(np.asarray(M, dtype=np.float64))
