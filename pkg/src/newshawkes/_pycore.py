"""Pure-Python implementation of the hot kernels.

Mirrors ``_core.pyx`` statement for statement so both backends produce the same
numbers (both call the C library ``exp``/``expm1``). Used when the compiled
extension is unavailable or ``NEWSHAWKES_PURE_PYTHON`` is set.

All functions take the endogenous kernel as a sum of exponentials
``(amps, rates)`` and the news kernel as four scalars ``(ac, bc, anc, bnc)``:
causal ``ac*exp(-bc*(t-z))`` for ``z < t`` and ramp ``anc*exp(bnc*(t-z))`` for
``z > t``. News times must be sorted.
"""
from math import exp, expm1, log

import numpy as np

MIN_DT = 1e-12
CHUNK = 4096


def _news_at(t, news, ac, bc, anc, bnc):
    lam = 0.0
    for z in news:
        d = t - z
        if d > 0.0:
            if ac != 0.0:
                lam += ac * exp(-bc * d)
        elif d < 0.0:
            if anc != 0.0:
                lam += anc * exp(bnc * d)
    return lam


def loglik_terms(times, t_end, mu, amps, rates, news, ac, bc, anc, bnc):
    """Return ``(sum_i log(lambda(t_i)), endogenous compensator on [., t_end])``.

    The first element is ``-inf`` as soon as the intensity is non-positive at
    an event.
    """
    times = [float(x) for x in times]
    amps = [float(x) for x in amps]
    rates = [float(x) for x in rates]
    news = [float(x) for x in news]
    nq = len(amps)
    r = [0.0] * nq
    sum_log = 0.0
    comp = 0.0
    prev = 0.0
    for i, t in enumerate(times):
        if i > 0:
            dt = t - prev
            if dt < MIN_DT:
                dt = MIN_DT
            for q in range(nq):
                r[q] = exp(-rates[q] * dt) * (1.0 + r[q])
        lam = mu
        for q in range(nq):
            lam += amps[q] * r[q]
        lam += _news_at(t, news, ac, bc, anc, bnc)
        if lam <= 0.0 or sum_log == -np.inf:
            sum_log = -np.inf
        else:
            sum_log += log(lam)
        tail = t_end - t
        for q in range(nq):
            comp += amps[q] / rates[q] * -expm1(-rates[q] * tail)
        prev = t
    return sum_log, comp


def compensator_increments(times, mu, amps, rates, news, ac, bc, anc, bnc):
    """Integral of the intensity between consecutive events (length N-1)."""
    times = [float(x) for x in times]
    amps = [float(x) for x in amps]
    rates = [float(x) for x in rates]
    news = [float(x) for x in news]
    nq = len(amps)
    n = len(times)
    out = np.zeros(max(n - 1, 0))
    r = [0.0] * nq
    for i in range(n - 1):
        t_a = times[i]
        t_b = times[i + 1]
        dt = t_b - t_a
        if dt < MIN_DT:
            dt = MIN_DT
        inc = mu * (t_b - t_a)
        for q in range(nq):
            e = 1.0 + r[q]
            inc += amps[q] / rates[q] * e * -expm1(-rates[q] * dt)
            r[q] = e * exp(-rates[q] * dt)
        for z in news:
            if ac != 0.0 and z < t_b:
                lo = t_a if t_a > z else z
                inc += ac / bc * exp(-bc * (lo - z)) * -expm1(-bc * (t_b - lo))
            if anc != 0.0 and z > t_a:
                hi = t_b if t_b < z else z
                inc += anc / bnc * exp(bnc * (hi - z)) * -expm1(-bnc * (hi - t_a))
        out[i] = inc
    return out


def intensity_grid(times, grid, amps, rates, news, ac, bc, anc, bnc):
    """Endogenous and exogenous intensity parts at non-decreasing ``grid``.

    Only events strictly before a grid point contribute to it.
    """
    times = [float(x) for x in times]
    amps = [float(x) for x in amps]
    rates = [float(x) for x in rates]
    news = [float(x) for x in news]
    nq = len(amps)
    n = len(times)
    g_n = len(grid)
    endo = np.zeros(g_n)
    exo = np.zeros(g_n)
    s = [0.0] * nq
    k = 0
    t_last = 0.0
    for gi in range(g_n):
        g = float(grid[gi])
        while k < n and times[k] < g:
            t = times[k]
            if k > 0:
                for q in range(nq):
                    s[q] = s[q] * exp(-rates[q] * (t - t_last)) + 1.0
            else:
                for q in range(nq):
                    s[q] = 1.0
            t_last = t
            k += 1
        val = 0.0
        if k > 0:
            for q in range(nq):
                val += amps[q] * s[q] * exp(-rates[q] * (g - t_last))
        endo[gi] = val
        exo[gi] = _news_at(g, news, ac, bc, anc, bnc)
    return endo, exo


def simulate_thinning(t0, t1, mu, amps, rates, news, ac, bc, anc, bnc, rng):
    """Ogata thinning on ``[t0, t1)`` with a piecewise dominating rate.

    The bound uses only the positive exponential terms (each is decreasing),
    the causal news sum at the current time and the ramp sum at the next news
    time; it is refreshed after every candidate and at every news time.
    Random numbers are drawn from ``rng`` in fixed-size chunks of
    (exponential, uniform) pairs, one pair per candidate.
    """
    amps = [float(x) for x in amps]
    rates = [float(x) for x in rates]
    news = [float(x) for x in news]
    nq = len(amps)
    nj = len(news)
    pos = [q for q in range(nq) if amps[q] > 0.0]
    s_state = [0.0] * nq
    t_last = t0
    have_event = False
    out = []
    e_buf = rng.standard_exponential(CHUNK)
    u_buf = rng.random(CHUNK)
    idx = 0
    s = t0
    jn = 0
    while True:
        while jn < nj and news[jn] <= s:
            jn += 1
        nxt = news[jn] if jn < nj and news[jn] < t1 else t1
        bound = mu
        if have_event:
            for q in pos:
                bound += amps[q] * s_state[q] * exp(-rates[q] * (s - t_last))
        if ac != 0.0:
            for j in range(jn):
                bound += ac * exp(-bc * (s - news[j]))
        if anc != 0.0:
            for j in range(jn, nj):
                bound += anc * exp(bnc * (nxt - news[j]))
        if idx == CHUNK:
            e_buf = rng.standard_exponential(CHUNK)
            u_buf = rng.random(CHUNK)
            idx = 0
        e = e_buf[idx]
        u = u_buf[idx]
        idx += 1
        if bound <= 0.0 or s + e / bound >= nxt:
            s = nxt
            if s >= t1:
                break
            continue
        s = s + e / bound
        lam = mu
        if have_event:
            for q in range(nq):
                lam += amps[q] * s_state[q] * exp(-rates[q] * (s - t_last))
        lam += _news_at(s, news, ac, bc, anc, bnc)
        if u * bound <= lam:
            if have_event:
                for q in range(nq):
                    s_state[q] = s_state[q] * exp(-rates[q] * (s - t_last)) + 1.0
            else:
                for q in range(nq):
                    s_state[q] = 1.0
                have_event = True
            t_last = s
            out.append(s)
    return np.array(out, dtype=float)
