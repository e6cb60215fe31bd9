"""Friedman ranking test and Nemenyi critical difference for comparing classifiers.

Conventions: ``M`` datasets (rows), ``m`` classifiers (columns), rank 1 is the
best accuracy, tied accuracies share the mean of the ranks they span.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "Q_ALPHA_005",
    "RankTable",
    "FriedmanResult",
    "NemenyiResult",
    "rank_matrix",
    "friedman",
    "nemenyi_cd",
    "significance_pairs",
]

# Studentized range quantiles / sqrt(2) at alpha = 0.05, keyed by classifier count.
Q_ALPHA_005 = {
    2: 1.960,
    3: 2.344,
    4: 2.569,
    5: 2.728,
    6: 2.850,
    7: 2.948,
    8: 3.031,
    9: 3.102,
    10: 3.164,
}


@dataclass(frozen=True)
class RankTable:
    accuracies: np.ndarray = field(repr=False)
    ranks: np.ndarray = field(repr=False)
    avg_ranks: np.ndarray

    @property
    def M(self):
        return self.ranks.shape[0]

    @property
    def m(self):
        return self.ranks.shape[1]


@dataclass(frozen=True)
class FriedmanResult:
    """``f_statistic`` is ``inf`` (and ``f_defined`` False) when chi^2 >= M(m-1)."""

    chi_squared: float
    f_statistic: float
    df1: int
    df2: int
    M: int
    m: int

    @property
    def f_defined(self):
        return math.isfinite(self.f_statistic)

    def rejects(self, f_critical):
        """Compare F_F against a caller-supplied critical value."""
        return self.f_statistic > f_critical


@dataclass(frozen=True)
class NemenyiResult:
    q_alpha: float
    critical_difference: float
    alpha: float = 0.05
    m: int = 0
    M: int = 0


def rank_matrix(accuracies):
    """Rank each row (dataset) of an ``M x m`` accuracy matrix; higher accuracy ranks first."""
    A = np.asarray(accuracies, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 2 or A.shape[1] < 2:
        raise ValueError(f"need an M x m matrix with M, m >= 2, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("accuracy matrix contains non-finite values")
    ranks = rankdata(-A, method="average", axis=1)
    return RankTable(A, ranks, ranks.mean(axis=0))


def friedman(ranks, M=None, m=None):
    """Friedman chi^2 and the Iman-Davenport F statistic.

    ``ranks`` is either the vector of average ranks (then ``M`` is required)
    or a full ``M x m`` rank matrix, whose column means are used.

    chi^2 = 12M / (m(m+1)) * (sum_j R_j^2 - m(m+1)^2 / 4)
    F_F   = (M - 1) chi^2 / (M(m - 1) - chi^2)
    """
    R = np.asarray(ranks, dtype=np.float64)
    if R.ndim == 2:
        if M is not None and M != R.shape[0]:
            raise ValueError(f"M={M} disagrees with {R.shape[0]} rank rows")
        M = R.shape[0]
        R = R.mean(axis=0)
    if M is None:
        raise ValueError("M (dataset count) is required with average ranks")
    m = R.shape[0] if m is None else int(m)
    M = int(M)
    if R.shape != (m,):
        raise ValueError(f"expected {m} average ranks, got {R.shape}")
    if M < 2 or m < 2:
        raise ValueError(f"need M >= 2 and m >= 2, got M={M}, m={m}")
    if not np.all(np.isfinite(R)):
        raise ValueError("ranks contain non-finite values")

    chi2 = 12.0 * M / (m * (m + 1)) * (float(np.sum(R * R)) - m * (m + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)
    denom = M * (m - 1) - chi2
    f_stat = (M - 1) * chi2 / denom if denom > 0 else math.inf
    return FriedmanResult(chi2, f_stat, m - 1, (m - 1) * (M - 1), M, m)


def nemenyi_cd(m, M, alpha=0.05):
    """Critical difference ``q_alpha * sqrt(m(m+1) / (6M))`` for m = 2..10 at alpha 0.05."""
    if not math.isclose(alpha, 0.05):
        raise ValueError(f"only alpha = 0.05 is tabulated, got {alpha}")
    if m not in Q_ALPHA_005:
        raise ValueError(f"no q_alpha entry for m={m}; supported: 2..10")
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    q = Q_ALPHA_005[m]
    return NemenyiResult(q, q * math.sqrt(m * (m + 1) / (6.0 * M)), 0.05, int(m), int(M))


def significance_pairs(avg_ranks, cd, names=None):
    """Every classifier pair with its rank gap and whether the gap reaches ``cd``."""
    if not cd > 0:
        raise ValueError(f"critical difference must be > 0, got {cd}")
    R = [float(r) for r in avg_ranks]
    names = list(names) if names is not None else list(range(len(R)))
    out = []
    for i, j in itertools.combinations(range(len(R)), 2):
        diff = abs(R[i] - R[j])
        out.append(((names[i], names[j]), diff, diff >= cd))
    return out
