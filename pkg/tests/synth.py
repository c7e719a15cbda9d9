"""Synthetic event and calendar files for the ingestion and CLI tests."""
import math

import numpy as np

from newshawkes.kernels import DoubleExpKernel, NewsExpKernel
from newshawkes.model import HawkesSpec
from newshawkes.newsflow import DAY, format_timestamp, parse_timestamp
from newshawkes.simulation import simulate_once

DAY1 = parse_timestamp("2012-11-01T00:00:00Z")  # a Thursday


def news_schedule():
    """(timestamp, currency, importance, description, forecast, actual, is_percentage)."""
    d1, d2 = DAY1, DAY1 + DAY
    return [
        (d1 + 10 * 3600, "USD", "High", "Durable Goods", 1.0, 1.5, 0),
        (d1 + 14 * 3600, "USD", "Medium", "Home Sales", 100.0, 110.0, 0),
        (d1 + 14 * 3600 + 600, "EUR", "Medium", "PMI", 50.0, 49.0, 0),
        (d2 + 12.5 * 3600, "USD", "High", "Nonfarm Payrolls", 125.0, 171.0, 0),
        (d2 + 12.5 * 3600, "USD", "High", "Unemployment Rate", 7.9, 7.9, 1),
        (d2 + 12.5 * 3600, "USD", "Low", "Minor", "", "", 0),
        (d2 + 2 * DAY + 12 * 3600, "USD", "High", "Saturday item", 1.0, 2.0, 0),
    ]


def write_inputs(folder, seed=0, mu=0.05):
    """Two weekdays and a weekend day of clustered events with news bursts."""
    rng = np.random.default_rng(seed)
    spec = HawkesSpec(mu, DoubleExpKernel(0.4, 1.0, 0.002, 0.01), NewsExpKernel(0.5, 0.005))
    sched = news_schedule()
    z = np.array(sorted({s[0] for s in sched if s[2] != "Low"}))
    ev = simulate_once(spec, DAY1, DAY1 + 4 * DAY, z, rng)
    # clock resolution of 100 ms: stamps are the end of the tick
    ticks = np.ceil(np.round((ev.times - DAY1) * 10, 6)) / 10 + DAY1
    events = folder / "events.csv"
    with open(events, "w") as fh:
        fh.write("timestamp\n")
        for t in ticks:
            fh.write(format_timestamp(t) + "\n")
    cal = folder / "calendar.csv"
    with open(cal, "w") as fh:
        fh.write("timestamp,currency,importance,description,forecast,actual,is_percentage\n")
        for t, cur, imp, desc, f, a, pct in sched:
            fh.write(f"{format_timestamp(t)},{cur},{imp},{desc},{f},{a},{pct}\n")
    return events, cal
