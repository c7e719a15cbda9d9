"""Exact log-likelihood of the news Hawkes model on a finite window.

The window is treated as having an empty pre-history (no events before
``t_start``); this is the usual finite-sample approximation and biases the
intensity down near the start of the window.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import core
from .kernels import NewsExpKernel, NonCausalNewsKernel
from .model import EventSeries, HawkesSpec, _news_array


@dataclass(frozen=True)
class LogLikelihoodReport:
    loglik: float
    n_events: int
    n_params: int


def news_compensator(spec: HawkesSpec, t_start: float, t_end: float, news) -> float:
    """Integral over ``[t_start, t_end]`` of the exogenous intensity."""
    z = _news_array(news)
    if spec.exo is None or z.size == 0:
        return 0.0
    if isinstance(spec.exo, NewsExpKernel):
        causal, ramp = spec.exo, None
    else:
        causal, ramp = spec.exo.causal, spec.exo.noncausal
    total = 0.0
    after = z < t_end
    if np.any(after):
        lo = np.maximum(t_start - z[after], 0.0)
        total += float(np.sum(causal.antiderivative_increment(lo, t_end - z[after])))
    if ramp is not None:
        before = z > t_start
        if np.any(before):
            # lags measured backwards from the announcement
            lo = np.maximum(z[before] - t_end, 0.0)
            total += float(np.sum(ramp.antiderivative_increment(lo, z[before] - t_start)))
    return total


def loglik_value(spec: HawkesSpec, events: EventSeries, news=None) -> float:
    """Log-likelihood in O(N) via exponential recursions; ``-inf`` if lambda <= 0 at an event."""
    mu, amps, rates, ac, bc, anc, bnc = spec.core_args()
    sum_log, endo_comp = core.loglik_terms(events.times, events.t_end, mu, amps, rates,
                                           _news_array(news), ac, bc, anc, bnc)
    if sum_log == -np.inf:
        return -np.inf
    return (-mu * events.duration - endo_comp
            - news_compensator(spec, events.t_start, events.t_end, news) + sum_log)


def loglik_recursive(spec: HawkesSpec, events: EventSeries, news=None) -> LogLikelihoodReport:
    return LogLikelihoodReport(loglik_value(spec, events, news), len(events), spec.n_params)


def _exo_at(spec: HawkesSpec, t, z):
    if spec.exo is None or z.size == 0:
        return np.zeros_like(t)
    lags = t[:, None] - z[None, :]
    if isinstance(spec.exo, NonCausalNewsKernel):
        return spec.exo.eval(lags).sum(axis=1)
    pos = lags > 0
    vals = np.where(pos, spec.exo.eval(np.where(pos, lags, 0.0)), 0.0)
    return vals.sum(axis=1)


def loglik_bruteforce(spec: HawkesSpec, events: EventSeries, news=None) -> LogLikelihoodReport:
    """O(N^2) oracle: direct double sum for the intensities, closed-form compensator."""
    t = events.times
    z = _news_array(news)
    lam = np.full(t.size, spec.mu)
    if spec.endo is not None:
        for i in range(1, t.size):
            lam[i] += np.sum(spec.endo.eval(t[i] - t[:i]))
    lam += _exo_at(spec, t, z)
    comp = spec.mu * events.duration
    if spec.endo is not None and t.size:
        comp += float(np.sum(spec.endo.antiderivative_increment(np.zeros(t.size), events.t_end - t)))
    comp += news_compensator(spec, events.t_start, events.t_end, z)
    if np.any(lam <= 0):
        ll = -np.inf
    else:
        ll = float(np.sum(np.log(lam))) - comp
    return LogLikelihoodReport(ll, len(events), spec.n_params)
