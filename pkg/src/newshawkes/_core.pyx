# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_pycore.py`` for the reference semantics."""
import numpy as np

from libc.math cimport exp, expm1, log, INFINITY

cdef enum:
    MAXQ = 64

cdef double MIN_DT = 1e-12
cdef Py_ssize_t CHUNK = 4096


cdef inline double _news_at(double t, const double[::1] news, double ac, double bc,
                            double anc, double bnc) nogil:
    cdef double lam = 0.0, d
    cdef Py_ssize_t j
    for j in range(news.shape[0]):
        d = t - news[j]
        if d > 0.0:
            if ac != 0.0:
                lam += ac * exp(-bc * d)
        elif d < 0.0:
            if anc != 0.0:
                lam += anc * exp(bnc * d)
    return lam


cdef _check_q(Py_ssize_t nq):
    if nq > MAXQ:
        raise ValueError(f"at most {MAXQ} exponential terms supported")


def loglik_terms(const double[::1] times, double t_end, double mu,
                 const double[::1] amps, const double[::1] rates,
                 const double[::1] news, double ac, double bc, double anc, double bnc):
    cdef Py_ssize_t nq = amps.shape[0], n = times.shape[0], i, q
    _check_q(nq)
    cdef double r[MAXQ]
    cdef double sum_log = 0.0, comp = 0.0, prev = 0.0, dt, lam, t, tail
    cdef bint dead = False
    for q in range(nq):
        r[q] = 0.0
    with nogil:
        for i in range(n):
            t = times[i]
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
            if lam <= 0.0 or dead:
                dead = True
            else:
                sum_log += log(lam)
            tail = t_end - t
            for q in range(nq):
                comp += amps[q] / rates[q] * -expm1(-rates[q] * tail)
            prev = t
    if dead:
        sum_log = -INFINITY
    return sum_log, comp


def compensator_increments(const double[::1] times, double mu,
                           const double[::1] amps, const double[::1] rates,
                           const double[::1] news, double ac, double bc,
                           double anc, double bnc):
    cdef Py_ssize_t nq = amps.shape[0], n = times.shape[0], i, q, j
    _check_q(nq)
    out_arr = np.zeros(max(n - 1, 0))
    cdef double[::1] out = out_arr
    cdef double r[MAXQ]
    cdef double t_a, t_b, dt, inc, e, z, lo, hi
    for q in range(nq):
        r[q] = 0.0
    with nogil:
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
            for j in range(news.shape[0]):
                z = news[j]
                if ac != 0.0 and z < t_b:
                    lo = t_a if t_a > z else z
                    inc += ac / bc * exp(-bc * (lo - z)) * -expm1(-bc * (t_b - lo))
                if anc != 0.0 and z > t_a:
                    hi = t_b if t_b < z else z
                    inc += anc / bnc * exp(bnc * (hi - z)) * -expm1(-bnc * (hi - t_a))
            out[i] = inc
    return out_arr


def intensity_grid(const double[::1] times, const double[::1] grid,
                   const double[::1] amps, const double[::1] rates,
                   const double[::1] news, double ac, double bc, double anc, double bnc):
    cdef Py_ssize_t nq = amps.shape[0], n = times.shape[0], g_n = grid.shape[0]
    cdef Py_ssize_t gi, q, k = 0
    _check_q(nq)
    endo_arr = np.zeros(g_n)
    exo_arr = np.zeros(g_n)
    cdef double[::1] endo = endo_arr
    cdef double[::1] exo = exo_arr
    cdef double s[MAXQ]
    cdef double t_last = 0.0, g, t, val
    for q in range(nq):
        s[q] = 0.0
    with nogil:
        for gi in range(g_n):
            g = grid[gi]
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
    return endo_arr, exo_arr


def simulate_thinning(double t0, double t1, double mu,
                      const double[::1] amps, const double[::1] rates,
                      const double[::1] news, double ac, double bc,
                      double anc, double bnc, rng):
    cdef Py_ssize_t nq = amps.shape[0], nj = news.shape[0]
    cdef Py_ssize_t q, j, idx = 0, jn = 0, n_out = 0
    _check_q(nq)
    cdef double s_state[MAXQ]
    cdef bint pos[MAXQ]
    cdef double t_last = t0, s = t0, nxt, bound, lam, e, u
    cdef bint have_event = False
    cdef double[::1] e_buf = rng.standard_exponential(CHUNK)
    cdef double[::1] u_buf = rng.random(CHUNK)
    out_arr = np.empty(1024)
    cdef double[::1] out = out_arr
    for q in range(nq):
        s_state[q] = 0.0
        pos[q] = amps[q] > 0.0
    while True:
        while jn < nj and news[jn] <= s:
            jn += 1
        nxt = news[jn] if jn < nj and news[jn] < t1 else t1
        bound = mu
        if have_event:
            for q in range(nq):
                if pos[q]:
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
            if n_out == out.shape[0]:
                out_arr = np.concatenate([out_arr, np.empty(out.shape[0])])
                out = out_arr
            out[n_out] = s
            n_out += 1
    return np.array(out_arr[:n_out])
