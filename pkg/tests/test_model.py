import numpy as np
import pytest
from hypothesis import given, strategies as st

from newshawkes.kernels import DoubleExpKernel, NewsExpKernel, NonCausalNewsKernel, PowerLawKernel
from newshawkes.model import (EventSeries, HawkesSpec, NewsTimes, NonStationaryError, WindowError,
                              data_fingerprint, decompose_intensity, intensity, mean_rate)


def brute_intensity(spec, events, news, t):
    lam = spec.mu
    past = events.times[events.times < t]
    if spec.endo is not None and past.size:
        lam += np.sum(spec.endo.eval(t - past))
    z = np.asarray(news, float)
    if spec.exo is not None and z.size:
        lags = t - z
        if isinstance(spec.exo, NonCausalNewsKernel):
            lam += np.sum(spec.exo.eval(lags))
        else:
            lam += np.sum(spec.exo.eval(lags[lags > 0]))
    return lam


def test_event_series_validation():
    with pytest.raises(ValueError):
        EventSeries([1.0, 1.0])
    with pytest.raises(ValueError):
        EventSeries([2.0, 1.0])
    with pytest.raises(ValueError):
        EventSeries([1.0, 5.0], 0.0, 4.0)
    with pytest.raises(ValueError):
        EventSeries([np.nan])
    ev = EventSeries([1.0, 2.0], 0.0, 10.0)
    assert ev.duration == 10.0 and len(ev) == 2
    with pytest.raises(ValueError):
        ev.times[0] = 3.0  # read-only


def test_intensity_is_left_continuous_at_events():
    spec = HawkesSpec(0.2, DoubleExpKernel(1.0, 1.0))
    ev = EventSeries([1.0, 2.0], 0.0, 5.0)
    # the event at t=1 does not excite itself
    assert intensity(spec, ev, None, 1.0) == pytest.approx(0.2)
    assert intensity(spec, ev, None, 2.0) == pytest.approx(0.2 + np.exp(-1.0))


def test_news_contributes_nothing_at_zero_lag():
    spec = HawkesSpec(0.1, None, NonCausalNewsKernel(NewsExpKernel(3.0, 1.0), NewsExpKernel(2.0, 1.0)))
    ev = EventSeries([], 0.0, 10.0)
    assert intensity(spec, ev, [5.0], 5.0) == pytest.approx(0.1)
    assert intensity(spec, ev, [5.0], 6.0) == pytest.approx(0.1 + 3.0 * np.exp(-1.0))
    assert intensity(spec, ev, [5.0], 4.0) == pytest.approx(0.1 + 2.0 * np.exp(-1.0))


def test_intensity_outside_window_raises():
    spec = HawkesSpec(0.1)
    ev = EventSeries([1.0], 0.0, 2.0)
    with pytest.raises(WindowError):
        intensity(spec, ev, None, 2.5)


@pytest.mark.parametrize("spec", [
    HawkesSpec(0.3, DoubleExpKernel(0.5, 2.0, 0.01, 0.05), NewsExpKernel(1.0, 0.1)),
    HawkesSpec(0.3, PowerLawKernel(0.7, 1.3, 0.05),
               NonCausalNewsKernel(NewsExpKernel(1.0, 0.1), NewsExpKernel(0.4, 0.2))),
])
def test_intensity_matches_direct_sum(spec, rng):
    ev = EventSeries(np.sort(rng.uniform(0, 100, 60)), 0.0, 100.0)
    news = [30.0, 70.0]
    grid = rng.uniform(0, 100, 40)
    got = intensity(spec, ev, news, grid)
    ref = [brute_intensity(spec, ev, news, g) for g in grid]
    np.testing.assert_allclose(got, ref, rtol=1e-12)


def test_stationarity_and_mean_rate():
    spec = HawkesSpec(0.1, DoubleExpKernel(0.5, 1.0))
    assert spec.branching_ratio == pytest.approx(0.5)
    assert mean_rate(spec) == pytest.approx(0.2)
    assert mean_rate(HawkesSpec(0.1, DoubleExpKernel(0.5, 1.0), NewsExpKernel(2.0, 0.01)),
                     news_rate=1 / 5400) == pytest.approx((0.1 + 200 / 5400) / 0.5)
    with pytest.raises(NonStationaryError):
        mean_rate(HawkesSpec(0.1, DoubleExpKernel(1.0, 1.0)))


def test_parameter_counts():
    de, pl = DoubleExpKernel(0.5, 1.0), PowerLawKernel(0.5, 1.2, 0.1)
    nc = NonCausalNewsKernel(NewsExpKernel(1, 1), NewsExpKernel(1, 1))
    assert HawkesSpec(1.0).n_params == 1
    assert HawkesSpec(1.0, de).n_params == 5
    assert HawkesSpec(1.0, pl).n_params == 4
    assert HawkesSpec(1.0, pl, NewsExpKernel(1, 1)).n_params == 6
    assert HawkesSpec(1.0, pl, nc).n_params == 8


def test_fingerprint_depends_on_events_and_news():
    ev = EventSeries([1.0, 2.0], 0.0, 3.0)
    f = data_fingerprint(ev, [1.5])
    assert f == data_fingerprint(EventSeries([1.0, 2.0], 0.0, 3.0), NewsTimes([1.5]))
    assert f != data_fingerprint(ev, [1.6])
    assert f != data_fingerprint(EventSeries([1.0, 2.0], 0.0, 3.5), [1.5])
    assert f != data_fingerprint(ev, None)


def test_decomposition_constant_poisson():
    spec = HawkesSpec(2.0)
    ev = EventSeries([1.0, 3.0], 0.0, 10.0)
    out = decompose_intensity(spec, ev, None, [0.5, 5.0])
    assert [d.baseline_frac for d in out] == [1.0, 1.0]


@given(st.lists(st.floats(0.0, 200.0), min_size=1, max_size=50),
       st.floats(0.0, 300.0))
def test_decomposition_fractions_sum_to_one(grid, window):
    spec = HawkesSpec(0.2, DoubleExpKernel(0.6, 1.0),
                      NonCausalNewsKernel(NewsExpKernel(1.0, 0.05), NewsExpKernel(0.3, 0.05)))
    ev = EventSeries(np.linspace(1.0, 199.0, 40), 0.0, 200.0)
    out = decompose_intensity(spec, ev, [100.0], grid, smooth_window=window)
    for d in out:
        parts = np.array([d.baseline_frac, d.endo_frac, d.exo_frac])
        assert np.all(parts >= -1e-12)
        assert parts.sum() == pytest.approx(1.0, abs=1e-12)
