"""Forecast error metrics and rank-based comparison of several models over several datasets.

Ranks follow the usual convention: on each dataset the model with the lowest
error gets rank 1 and tied models share the average of their ranks. The
Friedman statistic and the Nemenyi critical distance are computed from the
per-model average ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from .errors import ConfigError, DataError, ShapeError

# Studentized range quantiles at infinite degrees of freedom divided by sqrt(2),
# for k = 2..20 models.
Q_ALPHA = {
    0.05: (1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878,
           3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
           3.426041, 3.458425, 3.488685, 3.517073, 3.543799),
    0.10: (1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884,
           2.854606, 2.919889, 2.977768, 3.029694, 3.076733, 3.119693, 3.159199,
           3.195743, 3.229723, 3.261461, 3.291224, 3.319233),
}
P_CLAMP = (0.001, 0.900)


def _pair(pred, actual):
    p = np.asarray(pred, dtype=float).reshape(-1)
    a = np.asarray(actual, dtype=float).reshape(-1)
    if p.size != a.size:
        raise ShapeError(f"prediction length {p.size} != actual length {a.size}")
    if p.size == 0:
        raise ShapeError("metrics need at least one point")
    return p, a


def rmse(pred, actual) -> float:
    p, a = _pair(pred, actual)
    return float(np.sqrt(np.mean((p - a) ** 2)))


def naive_mae(train) -> float:
    """Mean absolute one-step change of the training series (the MASE scale)."""
    x = np.asarray(getattr(train, "values", train), dtype=float)
    if x.size < 2:
        raise DataError("MASE needs a training series of length >= 2")
    return float(np.mean(np.abs(np.diff(x))))


def mase(pred, actual, train) -> float:
    p, a = _pair(pred, actual)
    scale = naive_mae(train)
    if scale == 0.0:
        raise DataError("MASE is undefined for a constant training series")
    return float(np.mean(np.abs(p - a)) / scale)


def mape(pred, actual) -> float:
    """Mean absolute percentage error as a fraction (0.10 means 10 %)."""
    p, a = _pair(pred, actual)
    if np.any(a == 0.0):
        raise DataError("MAPE is undefined when an actual value is zero")
    return float(np.mean(np.abs((p - a) / a)))


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    mase: float
    mape: float
    n_test: int
    mase_denominator: float

    def as_dict(self) -> dict:
        return {"rmse": self.rmse, "mase": self.mase, "mape": self.mape,
                "n_test": self.n_test, "mase_denominator": self.mase_denominator}


def metric_report(pred, actual, train) -> MetricReport:
    p, a = _pair(pred, actual)
    return MetricReport(rmse(p, a), mase(p, a, train), mape(p, a), p.size, naive_mae(train))


@dataclass(frozen=True, eq=False)
class ComparisonTable:
    """Errors and ranks with models as rows and datasets as columns."""

    errors: np.ndarray
    ranks: np.ndarray
    avg_ranks: np.ndarray
    models: tuple
    datasets: tuple

    @property
    def k_models(self) -> int:
        return self.errors.shape[0]

    @property
    def n_datasets(self) -> int:
        return self.errors.shape[1]


def rank_models(errors, models: Optional[Sequence[str]] = None,
                datasets: Optional[Sequence[str]] = None) -> ComparisonTable:
    """Rank models per dataset (lowest error = 1, ties averaged)."""
    E = np.asarray(errors, dtype=float)
    if E.ndim != 2 or E.size == 0:
        raise ShapeError(f"error matrix must be 2-D and non-empty, got shape {E.shape}")
    if np.isnan(E).any():
        i, j = np.argwhere(np.isnan(E))[0]
        raise DataError(f"error matrix has NaN at model {i}, dataset {j}")
    k, n = E.shape
    models = tuple(models) if models is not None else tuple(f"model{i}" for i in range(k))
    datasets = tuple(datasets) if datasets is not None else tuple(f"dataset{j}" for j in range(n))
    if len(models) != k or len(datasets) != n:
        raise ShapeError("model/dataset labels do not match the error matrix")
    ranks = np.apply_along_axis(stats.rankdata, 0, E)
    return ComparisonTable(E, ranks, ranks.mean(axis=1), models, datasets)


def _check_friedman(table: ComparisonTable) -> None:
    if table.k_models < 3:
        raise ConfigError(f"the Friedman test needs k >= 3 models, got {table.k_models}")
    if table.n_datasets < 2:
        raise ConfigError(f"the Friedman test needs >= 2 datasets, got {table.n_datasets}")


def friedman_statistic(avg_ranks, n_datasets: int) -> float:
    R = np.asarray(avg_ranks, dtype=float)
    k = R.size
    return float(12.0 * n_datasets / (k * (k + 1)) * (np.sum(R**2) - k * (k + 1) ** 2 / 4.0))


def chi2_sf(x: float, df: int) -> float:
    """Chi-square survival function via the regularized upper incomplete gamma."""
    if x <= 0.0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def friedman_test(table: ComparisonTable) -> tuple[float, float]:
    """Friedman chi-square statistic from the average ranks and its p-value (k-1 dof)."""
    _check_friedman(table)
    chi2 = friedman_statistic(table.avg_ranks, table.n_datasets)
    # the statistic is a difference of two equal sums under the null; clip the rounding residue
    chi2 = max(chi2, 0.0) if abs(chi2) > 1e-9 else 0.0
    return chi2, chi2_sf(chi2, table.k_models - 1)


def rank_standard_error(k: int, n_datasets: int) -> float:
    return math.sqrt(k * (k + 1) / (6.0 * n_datasets))


def nemenyi_cd(k: int, n_datasets: int, alpha: float = 0.05) -> float:
    """Critical difference ``q_alpha * sqrt(k (k+1) / (6 N))``."""
    if alpha not in Q_ALPHA:
        raise ConfigError(f"alpha must be one of {sorted(Q_ALPHA)}, got {alpha}")
    if not 2 <= k <= 1 + len(Q_ALPHA[alpha]):
        raise ConfigError(f"critical values are tabulated for 2 <= k <= 20, got k={k}")
    if n_datasets < 1:
        raise ConfigError("n_datasets must be positive")
    return Q_ALPHA[alpha][k - 2] * rank_standard_error(k, n_datasets)


_Z = np.linspace(-9.0, 9.0, 3601)
_PHI_Z = np.exp(-0.5 * _Z**2) / math.sqrt(2.0 * math.pi)


def studentized_range_sf(q: float, k: int) -> float:
    """``P(Q > q)`` for the range of ``k`` standard normals (infinite dof).

    Uses ``P(Q <= q) = k * int phi(z) [Phi(z + q) - Phi(z)]^(k-1) dz`` with
    Simpson's rule on [-9, 9].
    """
    if q <= 0.0:
        return 1.0
    inner = special.ndtr(_Z + q) - special.ndtr(_Z)
    cdf = k * _simpson(_PHI_Z * inner ** (k - 1), _Z[1] - _Z[0])
    return float(min(1.0, max(0.0, 1.0 - cdf)))


def _simpson(y: np.ndarray, h: float) -> float:
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()))


@dataclass(frozen=True, eq=False)
class PairwiseResult:
    """Pairwise Nemenyi p-values.

    ``p_values`` is clamped to [0.001, 0.900] with -1 on the diagonal, the layout
    customary for post-hoc tables; ``raw`` holds the unclamped values.
    """

    p_values: np.ndarray
    raw: np.ndarray
    models: tuple


def nemenyi_pairwise(table: ComparisonTable) -> PairwiseResult:
    _check_friedman(table)
    k = table.k_models
    se = rank_standard_error(k, table.n_datasets)
    R = table.avg_ranks
    raw = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            p = studentized_range_sf(abs(R[i] - R[j]) / se * math.sqrt(2.0), k)
            raw[i, j] = raw[j, i] = p
    clamped = np.clip(raw, *P_CLAMP)
    np.fill_diagonal(clamped, -1.0)
    return PairwiseResult(clamped, raw, table.models)


def rank_diagram(table: ComparisonTable, cd: Optional[float] = None, width: int = 50) -> str:
    """Plain-text rank chart: models sorted by average rank, one bar each."""
    k = table.k_models
    order = np.argsort(table.avg_ranks, kind="stable")
    label_w = max(len(m) for m in table.models)
    scale = (width - 1) / max(k - 1, 1)
    lines = []
    for i in order:
        r = table.avg_ranks[i]
        pos = int(round((r - 1.0) * scale))
        lines.append(f"{table.models[i]:<{label_w}}  {r:6.2f} |{'=' * pos}*")
    if cd is not None:
        best = table.avg_ranks[order[0]]
        lines.append("")
        lines.append(f"critical distance {cd:.3f}: models with average rank above {best + cd:.2f} differ "
                     f"significantly from {table.models[order[0]]}")
        span = int(round(cd * scale))
        lines.append(f"{'CD':<{label_w}}         |{'-' * max(span, 1)}|")
    return "\n".join(lines)
