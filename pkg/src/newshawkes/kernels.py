"""Parametric excitation kernels.

Every kernel is a (possibly signed) sum of exponentials, which is what lets the
likelihood and the simulator run in linear time. ``exp_terms`` exposes that
representation as ``(amplitudes, rates)`` so that
``phi(t) = sum(amplitudes * exp(-rates * t))`` for ``t > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class KernelDomainError(ValueError):
    """Raised for invalid kernel parameters or lags outside the kernel domain."""


def _as_lags(lag, causal: bool):
    arr = np.asarray(lag, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise KernelDomainError("lags must be finite")
    if causal and np.any(arr < 0):
        raise KernelDomainError("negative lag on a causal kernel")
    return arr


def _check_bounds(from_lag, to_lag, causal: bool):
    a = np.asarray(from_lag, dtype=float)
    b = np.asarray(to_lag, dtype=float)
    if np.any(np.isnan(a)) or np.any(np.isnan(b)):
        raise KernelDomainError("integration bounds must not be NaN")
    if np.any(a > b):
        raise KernelDomainError("reversed integration bounds")
    if causal and np.any(a < 0):
        raise KernelDomainError("negative lag on a causal kernel")
    return a, b


def _exp_tail_mass(alpha, beta, a, b):
    # integral of alpha*exp(-beta*t) over [a, b], 0 <= a <= b <= inf
    return alpha / beta * np.exp(-beta * a) * -np.expm1(-beta * (b - a))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def de_out_of_order(alpha_a, beta_a, alpha_b, beta_b) -> bool:
    """True if the two components must be swapped to reach canonical order."""
    if (alpha_a == 0.0) != (alpha_b == 0.0):
        return alpha_a == 0.0
    return beta_a < beta_b


@dataclass(frozen=True)
class DoubleExpKernel:
    """``alpha_a*exp(-beta_a*t) + alpha_b*exp(-beta_b*t)``.

    Components are stored in canonical order: a zero-amplitude component is
    always B, otherwise ``beta_a >= beta_b`` (A is the short time scale).
    Construction swaps them if necessary.
    """

    alpha_a: float
    beta_a: float
    alpha_b: float = 0.0
    beta_b: float = 1.0

    def __post_init__(self):
        for name in ("alpha_a", "beta_a", "alpha_b", "beta_b"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise KernelDomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, float(v))
        if self.alpha_a < 0 or self.alpha_b < 0:
            raise KernelDomainError("amplitudes must be non-negative")
        if self.beta_a <= 0 or self.beta_b <= 0:
            raise KernelDomainError("decay rates must be positive")
        if de_out_of_order(self.alpha_a, self.beta_a, self.alpha_b, self.beta_b):
            a, b = (self.alpha_a, self.beta_a), (self.alpha_b, self.beta_b)
            object.__setattr__(self, "alpha_a", b[0])
            object.__setattr__(self, "beta_a", b[1])
            object.__setattr__(self, "alpha_b", a[0])
            object.__setattr__(self, "beta_b", a[1])

    def eval(self, lag):
        t = _as_lags(lag, causal=True)
        return _scalar(self.alpha_a * np.exp(-self.beta_a * t)
                       + self.alpha_b * np.exp(-self.beta_b * t))

    def total_mass(self) -> float:
        return self.alpha_a / self.beta_a + self.alpha_b / self.beta_b

    def antiderivative_increment(self, from_lag, to_lag):
        a, b = _check_bounds(from_lag, to_lag, causal=True)
        return _scalar(_exp_tail_mass(self.alpha_a, self.beta_a, a, b)
                       + _exp_tail_mass(self.alpha_b, self.beta_b, a, b))

    def exp_terms(self):
        return (np.array([self.alpha_a, self.alpha_b]),
                np.array([self.beta_a, self.beta_b]))


@dataclass(frozen=True)
class PowerLawKernel:
    """Sum-of-exponentials approximation of a power-law decaying kernel.

    ``phi(t) = n/Z * (sum_k a_k**-p * exp(-t/a_k) - S * exp(-t/a_{-1}))`` with
    ``a_k = tau0 * m**k`` for ``k = 0..M-1``. The cut-off constant ``S`` makes
    ``phi(0) = 0`` and ``Z`` makes the total mass equal ``n``:

        S = sum_k a_k**-p
        Z = sum_k a_k**(1-p) - S * a_{-1} = sum_k a_k**-p * (a_k - a_{-1})

    Mid-range lags decay like ``t**-p``.
    """

    n: float
    p: float
    tau0: float
    big_m: int = 15
    m: float = 5.0
    scales: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    a_cut: float = field(init=False, repr=False, compare=False)
    s_cut: float = field(init=False, repr=False, compare=False)
    z_norm: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("n", "p", "tau0", "m"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise KernelDomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, float(v))
        if int(self.big_m) != self.big_m or self.big_m < 2:
            raise KernelDomainError("big_m must be an integer >= 2")
        object.__setattr__(self, "big_m", int(self.big_m))
        if self.n < 0:
            raise KernelDomainError("n must be non-negative")
        if self.p <= 0 or self.tau0 <= 0:
            raise KernelDomainError("p and tau0 must be positive")
        if self.m <= 1:
            raise KernelDomainError("m must exceed 1")
        scales = self.tau0 * self.m ** np.arange(self.big_m, dtype=float)
        weights = scales ** -self.p
        a_cut = self.tau0 / self.m
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "a_cut", a_cut)
        object.__setattr__(self, "s_cut", float(np.sum(weights)))
        object.__setattr__(self, "z_norm", float(np.sum(weights * (scales - a_cut))))

    def eval(self, lag):
        t = _as_lags(lag, causal=True)
        tt = t[..., None]
        inv = 1.0 / self.scales
        # exp(-t/a_k) - exp(-t/a_cut) without cancellation; exactly 0 at t = 0
        diff = -np.exp(-tt * inv) * np.expm1(-tt * (1.0 / self.a_cut - inv))
        return _scalar(self.n / self.z_norm * np.sum(self.weights * diff, axis=-1))

    def total_mass(self) -> float:
        return self.n

    def antiderivative_increment(self, from_lag, to_lag):
        a, b = _check_bounds(from_lag, to_lag, causal=True)
        aa, bb = a[..., None], b[..., None]
        pos = np.sum(_exp_tail_mass(self.weights, 1.0 / self.scales, aa, bb), axis=-1)
        neg = _exp_tail_mass(self.s_cut, 1.0 / self.a_cut, a, b)
        return _scalar(self.n / self.z_norm * (pos - neg))

    def exp_terms(self):
        c = self.n / self.z_norm
        amps = np.append(c * self.weights, -c * self.s_cut)
        rates = np.append(1.0 / self.scales, 1.0 / self.a_cut)
        return amps, rates


@dataclass(frozen=True)
class NewsExpKernel:
    """Causal exogenous kernel ``alpha_n * exp(-beta_n * t)``."""

    alpha_n: float
    beta_n: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha_n) and np.isfinite(self.beta_n)):
            raise KernelDomainError("news kernel parameters must be finite")
        object.__setattr__(self, "alpha_n", float(self.alpha_n))
        object.__setattr__(self, "beta_n", float(self.beta_n))
        if self.alpha_n < 0:
            raise KernelDomainError("alpha_n must be non-negative")
        if self.beta_n <= 0:
            raise KernelDomainError("beta_n must be positive")

    def eval(self, lag):
        t = _as_lags(lag, causal=True)
        return _scalar(self.alpha_n * np.exp(-self.beta_n * t))

    def total_mass(self) -> float:
        return self.alpha_n / self.beta_n

    def antiderivative_increment(self, from_lag, to_lag):
        a, b = _check_bounds(from_lag, to_lag, causal=True)
        return _scalar(_exp_tail_mass(self.alpha_n, self.beta_n, a, b))

    def exp_terms(self):
        return np.array([self.alpha_n]), np.array([self.beta_n])


@dataclass(frozen=True)
class NonCausalNewsKernel:
    """Causal branch after the announcement plus a mirrored ramp before it.

    ``phi(t) = alpha_c*exp(-beta_c*t)`` for ``t > 0``,
    ``alpha_nc*exp(beta_nc*t)`` for ``t < 0`` and exactly 0 at ``t = 0``.
    """

    causal: NewsExpKernel
    noncausal: NewsExpKernel

    def eval(self, lag):
        t = _as_lags(lag, causal=False)
        out = np.where(t > 0, self.causal.alpha_n * np.exp(-self.causal.beta_n * np.abs(t)), 0.0)
        out = np.where(t < 0, self.noncausal.alpha_n * np.exp(-self.noncausal.beta_n * np.abs(t)), out)
        return _scalar(out)

    def total_mass(self) -> float:
        return self.causal.total_mass() + self.noncausal.total_mass()

    def antiderivative_increment(self, from_lag, to_lag):
        a, b = _check_bounds(from_lag, to_lag, causal=False)
        # the ramp side is the mirror image: integrate the causal form over [-b, -a]
        nc_lo = np.maximum(-np.minimum(b, 0.0), 0.0)
        nc_hi = np.maximum(-a, 0.0)
        nc = np.where(a < 0, _exp_tail_mass(self.noncausal.alpha_n, self.noncausal.beta_n,
                                            nc_lo, np.maximum(nc_hi, nc_lo)), 0.0)
        c_lo = np.maximum(a, 0.0)
        c = np.where(b > 0, _exp_tail_mass(self.causal.alpha_n, self.causal.beta_n,
                                           c_lo, np.maximum(b, c_lo)), 0.0)
        return _scalar(nc + c)


def total_mass(kernel) -> float:
    """Integral of the kernel over its whole support (0 for ``None``)."""
    return 0.0 if kernel is None else kernel.total_mass()
