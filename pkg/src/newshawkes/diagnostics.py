"""Goodness of fit and model selection.

Time-change residuals, the excess-dispersion (ED) test, QQ export,
AIC/BIC selection with relative likelihoods, and Welch's t-test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._backend import core
from .model import EventSeries, HawkesSpec, _news_array


class InsufficientDataError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


class FingerprintMismatch(ValueError):
    """Fits were made on different data and cannot be compared."""


@dataclass(frozen=True)
class ResidualSeries:
    """``Lambda_i = int_{t_i}^{t_{i+1}} lambda``, one per inter-event interval."""

    residuals: np.ndarray

    def __len__(self):
        return self.residuals.size


def residuals(spec: HawkesSpec, events: EventSeries, news=None) -> ResidualSeries:
    """Compensator increments between consecutive events (N-1 values).

    The stretch before the first event is not included.
    """
    mu, amps, rates, ac, bc, anc, bnc = spec.core_args()
    r = core.compensator_increments(events.times, mu, amps, rates, _news_array(news),
                                    ac, bc, anc, bnc)
    # rounding can push a tiny increment just below zero
    r = np.maximum(r, 0.0)
    r.setflags(write=False)
    return ResidualSeries(r)


@dataclass(frozen=True)
class EDResult:
    statistic: float
    p_value: float
    n: int

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level


def excess_dispersion_test(res, min_size: int = 30) -> EDResult:
    """``ED = sqrt(N/8) (s^2 - 1)`` with a two-sided normal p-value.

    Under unit-exponential residuals the sample variance has asymptotic
    variance 8/N, so ED is approximately standard normal.
    """
    x = np.asarray(getattr(res, "residuals", res), dtype=float)
    n = x.size
    if n < min_size:
        raise InsufficientDataError(f"ED test needs at least {min_size} residuals, got {n}")
    s2 = float(np.var(x, ddof=1))
    stat = math.sqrt(n / 8.0) * (s2 - 1.0)
    p = float(2.0 * stats.norm.sf(abs(stat)))
    return EDResult(stat, min(p, 1.0), n)


@dataclass(frozen=True)
class QQData:
    theoretical: np.ndarray
    empirical: np.ndarray

    def log(self) -> "QQData":
        """log-log variant; zero residuals are dropped."""
        keep = self.empirical > 0
        return QQData(np.log(self.theoretical[keep]), np.log(self.empirical[keep]))


def qq_export(res) -> QQData:
    """Sorted residuals against Exp(1) quantiles at plotting positions ``(i - 0.5)/N``."""
    x = np.sort(np.asarray(getattr(res, "residuals", res), dtype=float))
    if x.size == 0:
        raise InsufficientDataError("no residuals to plot")
    q = (np.arange(1, x.size + 1) - 0.5) / x.size
    return QQData(-np.log1p(-q), x)


@dataclass(frozen=True)
class SelectionReport:
    names: tuple
    aic: dict
    bic: dict
    delta_aic: dict
    delta_bic: dict
    relative_likelihood: dict
    best_aic: str
    best_bic: str


def relative_likelihood(aic_i: float, aic_min: float) -> float:
    return math.exp((aic_min - aic_i) / 2.0)


def select(models, names=None) -> SelectionReport:
    """AIC/BIC deltas and relative likelihoods for fits on identical data.

    ``models`` is a list (or dict name -> fit) of objects with ``aic``, ``bic``,
    ``fingerprint`` and ``variant`` attributes.
    """
    if isinstance(models, dict):
        names, models = list(models), list(models.values())
    models = list(models)
    if len(models) < 2:
        raise ValueError("select needs at least two models")
    if names is None:
        names = [m.variant for m in models]
    names = list(names)
    if len(set(names)) != len(names):
        raise ValueError("model names must be unique")
    prints = {m.fingerprint for m in models}
    if len(prints) != 1:
        raise FingerprintMismatch("models were fitted on different data")
    aic = {n: float(m.aic) for n, m in zip(names, models)}
    bic = {n: float(m.bic) for n, m in zip(names, models)}
    a_min, b_min = min(aic.values()), min(bic.values())
    # ties resolved by name so the report does not depend on input order
    best_aic = min(names, key=lambda n: (aic[n], n))
    best_bic = min(names, key=lambda n: (bic[n], n))
    order = tuple(sorted(names))
    return SelectionReport(
        names=order,
        aic={n: aic[n] for n in order},
        bic={n: bic[n] for n in order},
        delta_aic={n: aic[n] - a_min for n in order},
        delta_bic={n: bic[n] - b_min for n in order},
        relative_likelihood={n: relative_likelihood(aic[n], a_min) for n in order},
        best_aic=best_aic, best_bic=best_bic)


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_value: float


def welch_t_test(group_a, group_b) -> WelchResult:
    """Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise InsufficientDataError("each group needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0.0:
        raise DegenerateInputError("both groups have zero variance")
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = float(2.0 * stats.t.sf(abs(t), df))
    return WelchResult(float(t), float(df), min(p, 1.0))
