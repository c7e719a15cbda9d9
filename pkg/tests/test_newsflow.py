import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from newshawkes.newsflow import (DAY, InsufficientHistoryError, NewsRecord, ParseError,
                                 conditional_activity_curve, format_timestamp, impact,
                                 impact_series, isolated_windows, minute_counts, most_relevant,
                                 news_impact, parse_timestamp, randomize_times, read_calendar,
                                 read_event_file, split_sessions, surprise, write_calendar)

MON = parse_timestamp("2013-03-04T00:00:00Z")  # a Monday


def rec(t, imp="High", desc="x", f=None, a=None, pct=False, cur="USD"):
    return NewsRecord(t, cur, imp, desc, f, a, pct)


# --- parsing ---------------------------------------------------------------------

def test_timestamp_parsing():
    assert parse_timestamp("1970-01-01T00:00:01.500Z") == 1.5
    assert parse_timestamp("1970-01-01 00:01:00") == 60.0
    assert parse_timestamp("1970-01-01T01:00:00.1+01:00") == 0.1
    t = parse_timestamp("2012-11-02T12:30:00.123Z")
    assert format_timestamp(t) == "2012-11-02T12:30:00.123Z"
    with pytest.raises(ValueError):
        parse_timestamp("2012-11-02T12:30:00.1x2Z")


def test_event_file_header_optional(tmp_path):
    p = tmp_path / "ev.csv"
    p.write_text("time\n2012-11-02T12:30:00.100Z\n2012-11-02T12:30:00.100Z\n\n")
    np.testing.assert_array_equal(read_event_file(p), [parse_timestamp("2012-11-02T12:30:00.1Z")] * 2)
    p.write_text("2012-11-02T12:30:00.100Z\n")
    assert read_event_file(p).size == 1


def test_malformed_timestamp_names_line(tmp_path):
    p = tmp_path / "ev.csv"
    p.write_text("time\n2012-11-02T12:30:00.100Z\n2012-13-02T12:30:00Z\n")
    with pytest.raises(ParseError) as info:
        read_event_file(p)
    assert info.value.line == 3 and ":3:" in str(info.value)
    p.write_text("2012-11-02T12:30:01Z\n2012-11-02T12:30:00Z\n")
    with pytest.raises(ParseError, match="sorted"):
        read_event_file(p)


def test_calendar_round_trip(tmp_path):
    recs = [rec(MON + 3600, "High", "Payrolls, total", 100.0, 110.0),
            rec(MON + 7200, "Low", "Minor"),
            rec(MON + 9000, "Medium", "Rate", 5.0, 5.25, True, "EUR")]
    p = tmp_path / "cal.csv"
    write_calendar(p, recs)
    assert read_calendar(p) == recs


def test_calendar_errors_name_line(tmp_path):
    p = tmp_path / "cal.csv"
    p.write_text("timestamp,currency,importance,description,forecast,actual,is_percentage\n"
                 "2013-03-04T10:00:00Z,USD,High,ok,,,0\n"
                 "2013-03-04T11:00:00Z,USD,Huge,bad,,,0\n")
    with pytest.raises(ParseError) as info:
        read_calendar(p)
    assert info.value.line == 3
    p.write_text("2013-03-04T10:00:00Z,USD,High\n")
    with pytest.raises(ParseError, match="columns"):
        read_calendar(p)


# --- randomization ---------------------------------------------------------------------

def test_randomize_shared_stamp():
    out = randomize_times([1.0, 1.0], seed=3).times
    assert out[0] != out[1]
    assert np.all((out >= 0.9) & (out < 1.0))


def test_randomize_empty_and_deterministic():
    assert len(randomize_times([])) == 0
    raw = np.repeat(np.arange(10) * 0.1 + 5.0, 3)
    assert np.array_equal(randomize_times(raw, 1).times, randomize_times(raw, 1).times)
    assert not np.array_equal(randomize_times(raw, 1).times, randomize_times(raw, 2).times)


def test_randomize_jitter_is_uniform():
    raw = np.arange(1, 100_001, dtype=float)  # one stamp per second: order is preserved
    jitter = raw - randomize_times(raw, seed=0).times
    assert np.all((jitter > 0) & (jitter <= 0.1 + 1e-9))
    assert stats.kstest(jitter / 0.1, "uniform").pvalue > 0.01


@given(st.lists(st.integers(0, 50), min_size=1, max_size=60), st.integers(0, 2**32 - 1))
def test_randomize_preserves_count_and_tick_order(ticks, seed):
    raw = np.sort(np.array(ticks) * 0.1 + 1000.0)
    out = randomize_times(raw, seed).times
    assert out.size == raw.size
    assert np.all(np.diff(out) > 0)
    assert np.all(out >= raw - 0.1) and np.all(out < raw)


def test_split_sessions_drops_weekends_and_shifts():
    t = np.array([MON + 8 * 3600, MON + 17 * 3600, MON + 5 * DAY + 9 * 3600, MON + DAY + 7.5 * 3600])
    days = split_sessions(np.sort(t))
    assert sorted(days) == [int(MON // DAY), int(MON // DAY) + 1]
    first = days[int(MON // DAY)]
    np.testing.assert_allclose(first.times, [1800.0])
    assert (first.t_start, first.t_end) == (0.0, 32400.0)
    assert days[int(MON // DAY) + 1].times[0] == 0.0


# --- impact ---------------------------------------------------------------------

def test_impact_of_steady_activity_is_one():
    assert impact([7] * 101, 100, 100) == 1.0


def test_impact_arithmetic_and_own_minute_excluded():
    counts = [10] * 100 + [130]
    assert impact(counts, 100, 100) == 13.0
    s = impact_series(counts, 100)
    assert s.sma[100] == 10.0 and np.all(np.isnan(s.theta[:100]))


def test_impact_window_one_is_ratio_of_consecutive_counts():
    counts = np.array([3, 6, 2, 8, 8, 0, 5])
    th = impact_series(counts, 1).theta
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = np.where(counts[:-1] > 0, counts[1:] / counts[:-1], np.nan)
    np.testing.assert_array_equal(th[1:], expected)


def test_impact_undefined_cases():
    assert math.isnan(impact([0] * 100 + [3], 100, 100))
    with pytest.raises(InsufficientHistoryError):
        impact([1] * 50, 49, 100)


def test_impact_of_poisson_stream_fluctuates_around_one():
    counts = np.random.default_rng(0).poisson(60, 10_100)
    th = impact_series(counts, 100).theta[100:]
    assert abs(th.mean() - 1) < 3 * th.std() / math.sqrt(th.size)


def test_news_impact_uses_minute_starting_at_news():
    z = MON + 12.5 * 3600
    quiet = np.arange(z - 6000, z, 6.0)           # 10 per minute
    burst = z + np.linspace(0.1, 59.9, 130)
    assert news_impact(np.concatenate([quiet, burst]), z, 100) == pytest.approx(13.0)
    assert minute_counts(burst, z, z + 120).tolist() == [130, 0]


# --- surprise ----------------------------------------------------------------------

def test_surprise_values():
    assert surprise(rec(0, f=2.0, a=2.0)) == surprise(rec(0, f=2.0, a=2.0, pct=True))
    s = surprise(rec(0, f=100.0, a=110.0))
    assert (s.s_abs, s.s_rel, s.s_combined) == (10.0, 10.0, 10.0)
    s = surprise(rec(0, f=7.9, a=7.7, pct=True))
    assert s.s_combined == pytest.approx(0.2) and s.s_rel == pytest.approx(0.2 / 7.9 * 100)
    assert surprise(rec(0, f=None, a=1.0)) is None
    assert math.isnan(surprise(rec(0, f=0.0, a=1.0)).s_rel)
    assert surprise(rec(0, f=-2.0, a=-1.0)).s_rel == pytest.approx(50.0)


@given(st.floats(-1e3, 1e3).filter(lambda x: abs(x) > 1e-3), st.floats(-1e3, 1e3),
       st.floats(1e-3, 1e3))
def test_surprise_scale_covariance(f, a, c):
    s, t = surprise(rec(0, f=f, a=a)), surprise(rec(0, f=c * f, a=c * a))
    assert t.s_rel == pytest.approx(s.s_rel, rel=1e-9, abs=1e-9)
    assert t.s_abs == pytest.approx(c * s.s_abs, rel=1e-9, abs=1e-9)


def test_large_surprise_is_in_top_quartile():
    rng = np.random.default_rng(0)
    recs = [rec(i, f=100.0, a=100.0 * (1 + rng.normal(0, 0.1))) for i in range(300)]
    values = [surprise(r).s_combined for r in recs]
    big = surprise(rec(0, f=100.0, a=56.0)).s_combined
    assert big == pytest.approx(44.0)
    assert big > np.quantile(values, 0.75)


# --- isolated windows -------------------------------------------------------------

def test_close_news_are_not_isolated():
    noon = MON + 12 * 3600
    assert isolated_windows([rec(noon), rec(noon + 600)]) == []


def test_single_news_at_session_midpoint():
    noon = MON + 12 * 3600
    (w,) = isolated_windows([rec(noon), rec(noon + 3000, "Low")])
    assert w.local_news_time == 5400.0 and w.end - w.start == 10_800.0


def test_window_must_fit_in_weekday_session():
    assert isolated_windows([rec(MON + 8 * 3600)]) == []          # too early
    assert isolated_windows([rec(MON + 5 * DAY + 12 * 3600)]) == []  # Saturday


def test_one_record_per_time_by_importance_then_description():
    t = MON + 12 * 3600
    kept = most_relevant([rec(t, "Medium", "a"), rec(t, "High", "z"), rec(t, "High", "b"),
                          rec(t + 1, "Low", "c")])
    assert [(r.importance, r.description) for r in kept] == [("High", "b")]


def scan_oracle(records, half_width=5400.0):
    """Brute force over calendar dates with the datetime module."""
    mh = sorted({r.timestamp for r in records if r.importance in ("Medium", "High")})
    count = 0
    for z in mh:
        d = datetime.fromtimestamp(z, timezone.utc)
        if d.weekday() >= 5:
            continue
        day = d.replace(hour=0, minute=0, second=0, microsecond=0)
        lo = (day + timedelta(hours=7, minutes=30)).timestamp()
        hi = (day + timedelta(hours=16, minutes=30)).timestamp()
        if z - half_width < lo or z + half_width > hi:
            continue
        if all(abs(o - z) > half_width for o in mh if o != z):
            count += 1
    return count


def synthetic_year(seed):
    rng = np.random.default_rng(seed)
    n = 1500
    days = rng.integers(0, 365, n)
    minutes = rng.choice(np.arange(0, 24 * 60, 15), n)
    imp = rng.choice(["Low", "Medium", "High"], n, p=[0.5, 0.3, 0.2])
    return [rec(MON + d * DAY + m * 60.0, i, f"n{k}") for k, (d, m, i) in enumerate(zip(days, minutes, imp))]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_window_count_matches_scan_oracle(seed):
    cal = synthetic_year(seed)
    wins = isolated_windows(cal)
    assert len(wins) == scan_oracle(cal) > 0


@given(st.integers(0, 10_000))
def test_windows_never_contain_a_second_news(seed):
    cal = synthetic_year(seed)[:300]
    mh = np.array([r.timestamp for r in cal if r.importance != "Low"])
    for w in isolated_windows(cal):
        assert np.count_nonzero((mh >= w.start) & (mh <= w.end)) >= 1
        assert np.unique(mh[(mh >= w.start) & (mh <= w.end)]).size == 1


# --- conditional activity curve ----------------------------------------------------

def test_curve_all_above_one():
    c = conditional_activity_curve([2.0, 3.0, 1.5], [0.0, 5.0, 9.0], [0, 4, 10])
    np.testing.assert_array_equal(c.probability, [1.0, 1.0])
    np.testing.assert_array_equal(c.counts, [1, 2])


def test_curve_empty_bin_is_undefined():
    c = conditional_activity_curve([2.0], [1.0], [0, 2, 4])
    assert c.probability[0] == 1.0 and math.isnan(c.probability[1])
    with pytest.raises(ValueError):
        conditional_activity_curve([1.0], [1.0], [0, 0])


def test_curve_is_flat_for_shuffled_pairs():
    rng = np.random.default_rng(0)
    theta = rng.lognormal(0.3, 0.8, 20_000)
    s = rng.permutation(rng.exponential(10.0, 20_000))
    c = conditional_activity_curve(theta, s, np.quantile(s, np.linspace(0, 1, 6)))
    p_all = np.mean(theta > 1)
    assert np.all(np.abs(c.probability - p_all) < 3 * c.stderr + 1e-12)
