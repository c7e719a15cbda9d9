"""Compare the compiled core with the pure-Python fallback.

    python3 benchmarks/bench_core.py [--events 20000] [--repeat 3]

Times the three hot loops (log-likelihood recursion, compensator increments,
thinning) on the same inputs with both backends and checks that they agree.
"""
import argparse
import time

import numpy as np

from newshawkes import _pycore
from newshawkes.kernels import DoubleExpKernel, NewsExpKernel, NonCausalNewsKernel, PowerLawKernel
from newshawkes.model import HawkesSpec, _news_array
from newshawkes.simulation import simulate_once

try:
    from newshawkes import _core
except ImportError:  # extension not built
    _core = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    news = NonCausalNewsKernel(NewsExpKernel(2.0, 0.01), NewsExpKernel(0.3, 0.02))
    yield "de+news+nc", HawkesSpec(0.1, DoubleExpKernel(0.5, 1.0, 0.001, 0.01), news)
    yield "pl+news", HawkesSpec(0.1, PowerLawKernel(0.6, 1.4, 0.05), NewsExpKernel(2.0, 0.01))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=20_000, help="approximate events per series")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _core is None:
        raise SystemExit("compiled core not built; run `pip install -e . --no-build-isolation`")

    print(f"{'case':<12} {'loop':<24} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, spec in cases():
        horizon = args.events / (spec.mu / (1 - spec.branching_ratio))
        z = np.array([horizon / 2])
        ev = simulate_once(spec, 0.0, horizon, z, np.random.default_rng(0))
        mu, amps, rates, ac, bc, anc, bnc = spec.core_args()
        news = _news_array(z)
        jobs = {
            f"loglik (N={len(ev)})": lambda c: c.loglik_terms(
                ev.times, ev.t_end, mu, amps, rates, news, ac, bc, anc, bnc),
            "compensator": lambda c: c.compensator_increments(
                ev.times, mu, amps, rates, news, ac, bc, anc, bnc),
            "thinning": lambda c: c.simulate_thinning(
                0.0, horizon, mu, amps, rates, news, ac, bc, anc, bnc,
                np.random.default_rng(1)),
        }
        for label, job in jobs.items():
            t_py, out_py = best_of(lambda: job(_pycore), args.repeat)
            t_c, out_c = best_of(lambda: job(_core), args.repeat)
            np.testing.assert_allclose(np.asarray(out_py, float), np.asarray(out_c, float),
                                       rtol=1e-10)
            print(f"{name:<12} {label:<24} {t_py:>10.4f} {t_c:>10.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
