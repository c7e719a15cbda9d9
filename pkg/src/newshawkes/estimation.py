"""Multi-start box-constrained maximum-likelihood fitting.

Parameters are optimised with L-BFGS-B on a transformed box: strictly
positive rates and time scales on a log scale, amplitudes (which may sit at 0)
on a linear scale. Gradients are central finite differences of the
log-likelihood; there are no analytic gradients.

The default bounds below are this package's own choices; they are recorded
in every :class:`FitResult` so a fit can be reproduced.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .kernels import (DoubleExpKernel, NewsExpKernel, NonCausalNewsKernel, PowerLawKernel,
                      de_out_of_order)
from .likelihood import loglik_value
from .model import EventSeries, HawkesSpec, NewsTimes, _news_array, data_fingerprint


class FitError(RuntimeError):
    """Every start failed; ``diagnostics`` holds one message per start."""

    def __init__(self, msg, diagnostics=()):
        super().__init__(msg)
        self.diagnostics = list(diagnostics)


class HessianWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ParamDef:
    name: str
    lo: float
    hi: float
    log: bool


def _p(name, lo, hi, log):
    return ParamDef(name, lo, hi, log)


_ENDO = {
    "poisson": (),
    "de": (_p("alpha_a", 0.0, 1e3, False), _p("beta_a", 1e-4, 1e4, True),
           _p("alpha_b", 0.0, 1e3, False), _p("beta_b", 1e-5, 1e4, True)),
    "pl": (_p("n", 0.0, 0.999, False), _p("tau0", 1e-4, 1e3, True),
           _p("p", 0.05, 10.0, True)),
}
_NEWS = (_p("alpha_n", 0.0, 1e4, False), _p("beta_n", 1e-6, 1e2, True))
_RAMP = (_p("alpha_nc", 0.0, 1e4, False), _p("beta_nc", 1e-6, 1e2, True))

# news amplitude -> its decay rate (unidentified when the amplitude is pinned at 0)
_PAIRED = {"alpha_n": "beta_n", "alpha_nc": "beta_nc", "alpha_a": "beta_a", "alpha_b": "beta_b"}


@dataclass(frozen=True)
class Variant:
    name: str
    endo: str
    news: bool
    ramp: bool

    @property
    def params(self) -> tuple[ParamDef, ...]:
        mu = (_p("mu", 1e-8, math.inf, True),)
        return mu + _ENDO[self.endo] + (_NEWS if self.news else ()) + (_RAMP if self.ramp else ())

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def k(self) -> int:
        return len(self.params)

    def build(self, values: dict, big_m: int = 15, m: float = 5.0) -> HawkesSpec:
        if self.endo == "de":
            endo = DoubleExpKernel(values["alpha_a"], values["beta_a"],
                                   values["alpha_b"], values["beta_b"])
        elif self.endo == "pl":
            endo = PowerLawKernel(values["n"], values["p"], values["tau0"], big_m, m)
        else:
            endo = None
        exo = None
        if self.news:
            exo = NewsExpKernel(values["alpha_n"], values["beta_n"])
            if self.ramp:
                exo = NonCausalNewsKernel(exo, NewsExpKernel(values["alpha_nc"], values["beta_nc"]))
        return HawkesSpec(values["mu"], endo, exo)

    def values_of(self, spec: HawkesSpec) -> dict:
        v = {"mu": spec.mu}
        if self.endo == "de":
            e = spec.endo
            v.update(alpha_a=e.alpha_a, beta_a=e.beta_a, alpha_b=e.alpha_b, beta_b=e.beta_b)
        elif self.endo == "pl":
            v.update(n=spec.endo.n, tau0=spec.endo.tau0, p=spec.endo.p)
        if self.news:
            ac, bc, anc, bnc = spec.news_params()
            v.update(alpha_n=ac, beta_n=bc)
            if self.ramp:
                v.update(alpha_nc=anc, beta_nc=bnc)
        return v


VARIANTS = {
    "poisson": Variant("poisson", "poisson", False, False),
    "de": Variant("de", "de", False, False),
    "pl": Variant("pl", "pl", False, False),
    "de+news": Variant("de+news", "de", True, False),
    "pl+news": Variant("pl+news", "pl", True, False),
    "de+news+nc": Variant("de+news+nc", "de", True, True),
    "pl+news+nc": Variant("pl+news+nc", "pl", True, True),
}


def get_variant(name) -> Variant:
    if isinstance(name, Variant):
        return name
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}") from None


def _start_sampler(variant: Variant, rate: float) -> Callable[[dict], float]:
    """Map a unit-cube coordinate per parameter to a 'reasonable' starting value.

    Amplitudes are drawn through the kernel mass (alpha = mass * beta) so every
    start has a sensible branching ratio.
    """
    def logu(u, lo, hi):
        return math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))

    def sample(u: dict) -> dict:
        v = {"mu": rate * (0.05 + 0.95 * u["mu"])}
        if variant.endo == "de":
            v["beta_a"] = logu(u["beta_a"], 0.3, 30.0)
            v["alpha_a"] = (0.1 + 0.5 * u["alpha_a"]) * v["beta_a"]
            v["beta_b"] = logu(u["beta_b"], 1e-3, 0.3)
            v["alpha_b"] = (0.02 + 0.28 * u["alpha_b"]) * v["beta_b"]
        elif variant.endo == "pl":
            v["n"] = 0.3 + 0.6 * u["n"]
            v["tau0"] = logu(u["tau0"], 0.02, 2.0)
            v["p"] = 1.05 + 0.95 * u["p"]
        if variant.news:
            v["beta_n"] = logu(u["beta_n"], 1e-3, 1.0)
            v["alpha_n"] = logu(u["alpha_n"], 1.0, 300.0) * v["beta_n"]
        if variant.ramp:
            v["beta_nc"] = logu(u["beta_nc"], 1e-3, 1.0)
            v["alpha_nc"] = logu(u["alpha_nc"], 1.0, 100.0) * v["beta_nc"]
        return v

    return sample


@dataclass(frozen=True)
class FitConfig:
    """Optimiser settings.

    ``bounds`` overrides the default box per parameter name; ``fixed`` pins
    parameters (they keep counting towards AIC/BIC); ``starts`` replaces the
    quasi-random starting points with explicit parameter dicts.
    """

    n_starts: int = 10
    bounds: dict = field(default_factory=dict)
    max_iters: int = 1000
    tolerance: float = 1e-9
    gtol: float = 1e-6
    seed: int = 0
    fixed: dict = field(default_factory=dict)
    starts: tuple = ()
    big_m: int = 15
    m: float = 5.0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        for name, (lo, hi) in self.bounds.items():
            if not lo <= hi:
                raise ValueError(f"empty bound for {name}")
            if name == "n" and hi >= 1.0:
                raise ValueError("upper bound on n must be < 1")


@dataclass
class StartRecord:
    start: dict
    start_loglik: float
    loglik: float
    converged: bool
    message: str
    x: np.ndarray | None = None


@dataclass
class FitResult:
    variant: str
    spec: HawkesSpec
    params: dict
    loglik: float
    std_errors: dict
    aic: float
    bic: float
    converged: bool
    starts_tried: int
    boundary_flags: dict
    n_events: int
    n_params: int
    fingerprint: str
    fixed: tuple = ()
    bounds: dict = field(default_factory=dict)
    starts: list = field(default_factory=list)

    def vector(self) -> np.ndarray:
        return np.array([self.params[k] for k in get_variant(self.variant).names])


def information_criteria(loglik: float, k: int, n_events: int) -> tuple[float, float]:
    """``(AIC, BIC)`` with AIC = 2k - 2 lnL and BIC = k ln(n) - 2 lnL."""
    aic = 2 * k - 2 * loglik
    bic = k * math.log(n_events) - 2 * loglik if n_events > 0 else math.nan
    return aic, bic


class _Problem:
    """Objective on the transformed box for the free parameters."""

    def __init__(self, variant, events, news, config: FitConfig):
        self.variant = variant
        self.events = events
        self.news = news
        self.config = config
        rate = max(len(events), 1) / events.duration
        self.rate = rate
        fixed = dict(config.fixed)
        for amp, rate_name in _PAIRED.items():
            if fixed.get(amp) == 0.0 and rate_name in variant.names and rate_name not in fixed:
                # unidentified once its amplitude is pinned at zero
                fixed[rate_name] = 1.0
        unknown = set(fixed) - set(variant.names)
        if unknown:
            raise ValueError(f"cannot fix {sorted(unknown)} for variant {variant.name}")
        self.fixed = fixed
        self.bounds = {}
        for p in variant.params:
            lo, hi = config.bounds.get(p.name, (p.lo, p.hi))
            if p.name == "mu" and p.name not in config.bounds:
                hi = 5.0 * rate
            self.bounds[p.name] = (float(lo), float(hi))
        self.free = [p for p in variant.params if p.name not in fixed]
        self.scale = max(len(events), 1)

    def to_x(self, values: dict) -> np.ndarray:
        out = []
        for p in self.free:
            lo, hi = self.bounds[p.name]
            v = min(max(values[p.name], lo), hi)
            out.append(math.log(v) if p.log else v)
        return np.array(out)

    def x_bounds(self):
        return [tuple(math.log(b) if p.log else b for b in self.bounds[p.name]) for p in self.free]

    def to_values(self, x) -> dict:
        v = dict(self.fixed)
        for p, xi in zip(self.free, x):
            lo, hi = self.bounds[p.name]
            val = math.exp(xi) if p.log else float(xi)
            v[p.name] = min(max(val, lo), hi)
        return v

    def loglik_values(self, values: dict) -> float:
        spec = self.variant.build(values, self.config.big_m, self.config.m)
        return loglik_value(spec, self.events, self.news)

    def objective(self, x) -> float:
        ll = self.loglik_values(self.to_values(x))
        if not np.isfinite(ll):
            return 1e10
        return -ll / self.scale

    def gradient(self, x) -> np.ndarray:
        g = np.zeros_like(x)
        xb = self.x_bounds()
        for i in range(x.size):
            h = 1e-6 * max(1.0, abs(x[i]))
            lo, hi = xb[i]
            up = x.copy()
            dn = x.copy()
            up[i] = min(x[i] + h, hi)
            dn[i] = max(x[i] - h, lo)
            if up[i] == dn[i]:
                continue
            g[i] = (self.objective(up) - self.objective(dn)) / (up[i] - dn[i])
        return g

    def at_bound(self, values: dict) -> dict:
        flags = {}
        for p in self.variant.params:
            if p.name in self.fixed:
                flags[p.name] = False
                continue
            lo, hi = self.bounds[p.name]
            v = values[p.name]
            if p.log:
                width = math.log(hi) - math.log(lo)
                d = min(math.log(v) - math.log(lo), math.log(hi) - math.log(v))
            else:
                width = hi - lo
                d = min(v - lo, hi - v)
            flags[p.name] = bool(d <= 1e-7 * max(width, 1.0))
        return flags


def _starting_points(problem: _Problem, config: FitConfig) -> list[dict]:
    if config.starts:
        return [dict(s) for s in config.starts]
    names = problem.variant.names
    sampler = _start_sampler(problem.variant, problem.rate)
    cube = qmc.Halton(d=len(names), scramble=True, seed=config.seed).random(config.n_starts)
    return [sampler(dict(zip(names, row))) for row in cube]


def hessian_std_errors(spec_or_values, events: EventSeries, news=None, variant="de",
                       free: list[str] | None = None, bounds: dict | None = None,
                       config: FitConfig | None = None, rel_step: float = 1e-4) -> dict:
    """Standard errors from the inverse of the negated log-likelihood Hessian.

    Central finite differences in the natural parameterisation over the names
    in ``free`` (default: all parameters of the variant). Returns NaN for every
    parameter when the Hessian is not negative definite, and NaN for names not
    in ``free``.
    """
    variant = get_variant(variant)
    config = config or FitConfig()
    values = (variant.values_of(spec_or_values) if isinstance(spec_or_values, HawkesSpec)
              else dict(spec_or_values))
    names = list(variant.names if free is None else free)
    out = {k: math.nan for k in variant.names}
    if not names:
        return out
    bounds = bounds or {}

    def f(vals):
        return loglik_value(variant.build(vals, config.big_m, config.m), events, news)

    theta = np.array([values[k] for k in names])
    h = rel_step * np.maximum(np.abs(theta), 1e-3)
    for i, k in enumerate(names):
        lo, hi = bounds.get(k, (0.0 if k != "mu" else 0.0, math.inf))
        room = min(theta[i] - lo, hi - theta[i])
        if room <= 0:
            warnings.warn(f"{k} sits on its bound; standard errors unavailable", HessianWarning)
            return out
        h[i] = min(h[i], room / 2)

    def shifted(steps):
        v = dict(values)
        for i, k in enumerate(names):
            v[k] = theta[i] + steps[i]
        return f(v)

    d = len(names)
    f0 = f(values)
    H = np.empty((d, d))
    e = np.eye(d) * h
    for i in range(d):
        H[i, i] = (shifted(e[i]) - 2 * f0 + shifted(-e[i])) / h[i] ** 2
        for j in range(i):
            H[i, j] = H[j, i] = (shifted(e[i] + e[j]) - shifted(e[i] - e[j])
                                 - shifted(-e[i] + e[j]) + shifted(-e[i] - e[j])) / (4 * h[i] * h[j])
    try:
        np.linalg.cholesky(-H)
        cov = np.linalg.inv(-H)
    except np.linalg.LinAlgError:
        warnings.warn("Hessian is not negative definite; standard errors unavailable",
                      HessianWarning)
        return out
    se = np.sqrt(np.diag(cov))
    for k, s in zip(names, se):
        out[k] = float(s)
    return out


def _run_start(problem: _Problem, start: dict) -> StartRecord:
    values = {**start, **problem.fixed}
    x0 = problem.to_x(values)
    start_ll = problem.loglik_values(problem.to_values(x0))
    if not problem.free:
        return StartRecord(start, start_ll, start_ll, bool(np.isfinite(start_ll)),
                           "no free parameters", x0)
    try:
        res = minimize(problem.objective, x0, jac=problem.gradient, method="L-BFGS-B",
                       bounds=problem.x_bounds(),
                       options={"maxiter": problem.config.max_iters,
                                "ftol": problem.config.tolerance,
                                "gtol": problem.config.gtol, "maxcor": 20})
    except (ValueError, FloatingPointError) as exc:
        return StartRecord(start, start_ll, -math.inf, False, f"error: {exc}")
    x = res.x
    ll = problem.loglik_values(problem.to_values(x))
    msg = res.message if isinstance(res.message, str) else str(res.message)
    # line-search stalls at a flat optimum count as converged when no progress is possible
    converged = bool(res.success) or ("ABNORMAL" in msg and res.nit > 0)
    return StartRecord(start, start_ll, ll, converged and bool(np.isfinite(ll)), msg, x)


def fit(variant, events: EventSeries, news=None, config: FitConfig | None = None) -> FitResult:
    """Maximum-likelihood fit of ``variant`` to ``events`` (and ``news``).

    Every start is optimised; the result is the converged start with the
    highest log-likelihood, ties (within 1e-9 relative) broken by the
    lexicographically smallest parameter vector.
    """
    variant = get_variant(variant)
    config = config or FitConfig()
    if len(events) == 0:
        raise ValueError("cannot fit an empty event series")
    if events.duration <= 0:
        raise ValueError("window length must be positive")
    news_arr = _news_array(news)
    news_obj = NewsTimes(news_arr)
    problem = _Problem(variant, events, news_obj, config)
    records = [_run_start(problem, s) for s in _starting_points(problem, config)]
    finite = [r for r in records if r.x is not None and np.isfinite(r.loglik)]
    if not finite:
        raise FitError(f"all {len(records)} starts failed for {variant.name}",
                       [r.message for r in records])
    pool = [r for r in finite if r.converged] or finite
    best_ll = max(r.loglik for r in pool)
    tol = 1e-9 * max(1.0, abs(best_ll))

    def vec(r):
        vals = problem.to_values(r.x)
        return tuple(vals[k] for k in variant.names)

    ties = [r for r in pool if r.loglik >= best_ll - tol]
    best = min(ties, key=vec)
    values = problem.to_values(best.x)
    spec = variant.build(values, config.big_m, config.m)
    flags = problem.at_bound(values)
    # a zero amplitude leaves its decay rate unidentified
    unidentified = {_PAIRED[a] for a in _PAIRED
                    if a in values and values[a] == 0.0 and _PAIRED[a] in values}
    interior = [p.name for p in problem.free
                if not flags[p.name] and p.name not in unidentified]
    std = hessian_std_errors(values, events, news_obj, variant, free=interior,
                             bounds=problem.bounds, config=config)
    for k, on_bound in flags.items():
        if on_bound:
            std[k] = math.nan
    fixed = set(problem.fixed)
    if variant.endo == "de" and de_out_of_order(values["alpha_a"], values["beta_a"],
                                                values["alpha_b"], values["beta_b"]):
        # report in the kernel's canonical order
        swap = {"alpha_a": "alpha_b", "alpha_b": "alpha_a", "beta_a": "beta_b", "beta_b": "beta_a"}
        values, std, flags = ({swap.get(k, k): v for k, v in d.items()} for d in (values, std, flags))
        fixed = {swap.get(k, k) for k in fixed}
    values = {k: values[k] for k in variant.names}
    std = {k: std[k] for k in variant.names}
    flags = {k: flags[k] for k in variant.names}
    k = variant.k
    loglik = best.loglik
    aic, bic = information_criteria(loglik, k, len(events))
    return FitResult(variant=variant.name, spec=spec, params=values, loglik=loglik,
                     std_errors=std, aic=aic, bic=bic, converged=best.converged,
                     starts_tried=len(records), boundary_flags=flags,
                     n_events=len(events), n_params=k,
                     fingerprint=data_fingerprint(events, news_obj),
                     fixed=tuple(sorted(fixed)), bounds=dict(problem.bounds),
                     starts=records)
