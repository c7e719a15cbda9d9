"""Intensity specification: baseline + endogenous kernel + exogenous news kernel."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import core
from .kernels import (DoubleExpKernel, NewsExpKernel, NonCausalNewsKernel,
                      PowerLawKernel, total_mass)


class NonStationaryError(ValueError):
    """The endogenous branching ratio is >= 1."""

    def __init__(self, mass):
        super().__init__(f"endogenous kernel mass {mass:.6g} >= 1: process is not stationary")
        self.mass = mass


class WindowError(ValueError):
    """A time lies outside the observation window."""


@dataclass(frozen=True, eq=False)
class EventSeries:
    """Strictly increasing event times observed on ``[t_start, t_end]``."""

    times: np.ndarray
    t_start: float = 0.0
    t_end: float = None

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=float)
        if t.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if not np.all(np.isfinite(t)):
            raise ValueError("times must be finite")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("event times must be strictly increasing")
        t_end = self.t_end
        if t_end is None:
            t_end = float(t[-1]) if t.size else float(self.t_start)
        if t_end < self.t_start:
            raise ValueError("t_end < t_start")
        if t.size and (t[0] < self.t_start or t[-1] > t_end):
            raise ValueError("event times outside [t_start, t_end]")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(t_end))

    def __len__(self):
        return self.times.size

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def shifted(self, offset: float) -> "EventSeries":
        return EventSeries(self.times - offset, self.t_start - offset, self.t_end - offset)


@dataclass(frozen=True, eq=False)
class NewsTimes:
    """Announcement times, non-decreasing; may lie outside the event window."""

    times: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=float).reshape(-1)
        if t.size > 1 and np.any(np.diff(t) < 0):
            raise ValueError("news times must be non-decreasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size


NO_NEWS = NewsTimes()


@dataclass(frozen=True)
class HawkesSpec:
    """``lambda(t) = mu + sum_{t_i<t} phi(t-t_i) + sum_j phi_N(t-z_j)``.

    ``endo`` is a :class:`DoubleExpKernel`, a :class:`PowerLawKernel` or
    ``None`` (Poisson); ``exo`` is ``None``, a causal :class:`NewsExpKernel`
    or a :class:`NonCausalNewsKernel`.
    """

    mu: float
    endo: DoubleExpKernel | PowerLawKernel | None = None
    exo: NewsExpKernel | NonCausalNewsKernel | None = None

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu < 0:
            raise ValueError(f"mu must be finite and >= 0, got {self.mu}")
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def branching_ratio(self) -> float:
        return total_mass(self.endo)

    @property
    def is_stationary(self) -> bool:
        return self.branching_ratio < 1.0

    @property
    def n_params(self) -> int:
        k = 1
        if isinstance(self.endo, DoubleExpKernel):
            k += 4
        elif isinstance(self.endo, PowerLawKernel):
            k += 3
        if isinstance(self.exo, NewsExpKernel):
            k += 2
        elif isinstance(self.exo, NonCausalNewsKernel):
            k += 4
        return k

    def without_exo(self) -> "HawkesSpec":
        return replace(self, exo=None)

    def endo_terms(self):
        if self.endo is None:
            return np.empty(0), np.empty(0)
        amps, rates = self.endo.exp_terms()
        return np.ascontiguousarray(amps, float), np.ascontiguousarray(rates, float)

    def news_params(self):
        """``(alpha_c, beta_c, alpha_nc, beta_nc)`` with zero amplitudes for absent parts."""
        if self.exo is None:
            return 0.0, 1.0, 0.0, 1.0
        if isinstance(self.exo, NewsExpKernel):
            return self.exo.alpha_n, self.exo.beta_n, 0.0, 1.0
        c, nc = self.exo.causal, self.exo.noncausal
        return c.alpha_n, c.beta_n, nc.alpha_n, nc.beta_n

    def core_args(self):
        amps, rates = self.endo_terms()
        return (self.mu, amps, rates) + self.news_params()


@dataclass(frozen=True)
class IntensityDecomposition:
    t: float
    baseline_frac: float
    endo_frac: float
    exo_frac: float


def _news_array(news):
    if news is None:
        return NO_NEWS.times
    if isinstance(news, NewsTimes):
        return news.times
    return NewsTimes(news).times


def _components(spec: HawkesSpec, events: EventSeries, news, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < events.t_start) or np.any(t > events.t_end):
        raise WindowError("time outside the observation window")
    order = np.argsort(t, kind="stable")
    grid = np.ascontiguousarray(t[order])
    mu, amps, rates, ac, bc, anc, bnc = spec.core_args()
    endo_s, exo_s = core.intensity_grid(events.times, grid, amps, rates,
                                        _news_array(news), ac, bc, anc, bnc)
    endo = np.empty_like(endo_s)
    exo = np.empty_like(exo_s)
    endo[order] = endo_s
    exo[order] = exo_s
    return endo, exo


def data_fingerprint(events: EventSeries, news=None) -> str:
    """Content hash of a window's events and news, used to refuse cross-data comparisons."""
    h = hashlib.sha256()
    h.update(np.array([events.t_start, events.t_end], dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(events.times, dtype="<f8").tobytes())
    h.update(b"|news|")
    h.update(np.ascontiguousarray(_news_array(news), dtype="<f8").tobytes())
    return h.hexdigest()


def intensity(spec: HawkesSpec, events: EventSeries, news, t):
    """Conditional intensity at ``t`` (scalar or array), events strictly before ``t``."""
    endo, exo = _components(spec, events, news, t)
    lam = spec.mu + endo + exo
    return float(lam[0]) if np.ndim(t) == 0 else lam


def mean_rate(spec: HawkesSpec, news_rate: float = 0.0) -> float:
    """Stationary mean rate ``(mu + news_rate * mass(phi_N)) / (1 - n)``."""
    n = spec.branching_ratio
    if n >= 1.0:
        raise NonStationaryError(n)
    return (spec.mu + news_rate * total_mass(spec.exo)) / (1.0 - n)


def decompose_intensity(spec: HawkesSpec, events: EventSeries, news, grid,
                        smooth_window: float = 100.0) -> list[IntensityDecomposition]:
    """Fractions of the intensity due to baseline, self-excitation and news.

    With ``smooth_window > 0`` each fraction is replaced by its trailing mean
    over grid points in ``(t - smooth_window, t]``, which keeps the sum at 1.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        return []
    if smooth_window < 0:
        raise ValueError("smooth_window must be >= 0")
    endo, exo = _components(spec, events, news, grid)
    lam = spec.mu + endo + exo
    with np.errstate(invalid="ignore", divide="ignore"):
        fr = np.column_stack([np.full_like(lam, spec.mu), endo, exo]) / lam[:, None]
    # zero intensity (mu = 0, nothing active): attribute to baseline
    fr[lam <= 0] = (1.0, 0.0, 0.0)
    if smooth_window > 0:
        order = np.argsort(grid, kind="stable")
        g = grid[order]
        cs = np.vstack([np.zeros(3), np.cumsum(fr[order], axis=0)])
        # window (t - w, t], always holding t itself and any duplicates of it
        hi = np.searchsorted(g, g, side="right")
        lo = np.minimum(np.searchsorted(g, g - smooth_window, side="right"),
                        np.searchsorted(g, g, side="left"))
        sm = (cs[hi] - cs[lo]) / (hi - lo)[:, None]
        fr = np.empty_like(sm)
        fr[order] = sm
    return [IntensityDecomposition(float(t), *map(float, row)) for t, row in zip(grid, fr)]
