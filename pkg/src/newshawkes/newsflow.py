"""Event and calendar ingestion plus news analytics.

Times are UTC. Files carry ISO-8601 stamps; in memory they are float
seconds since the Unix epoch, and per-session series are shifted so the
session opens at 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .model import EventSeries

IMPORTANCE_RANK = {"Low": 0, "Medium": 1, "High": 2}
DEFAULT_SESSION = ("07:30", "16:30")
DAY = 86_400.0
CALENDAR_COLUMNS = ("timestamp", "currency", "importance", "description",
                    "forecast", "actual", "is_percentage")

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based."""

    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = path
        self.line = line


class InsufficientHistoryError(ValueError):
    pass


# --- parsing -----------------------------------------------------------------

def parse_timestamp(text: str) -> float:
    """ISO-8601 UTC stamp -> epoch seconds, exact to the millisecond."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    frac = None
    # fromisoformat in 3.10 only accepts 3 or 6 fraction digits
    head, dot, rest = s.partition(".")
    if dot:
        digits = rest
        tz = ""
        for sep in ("+", "-"):
            if sep in rest:
                digits, _, tz = rest.partition(sep)
                tz = sep + tz
                break
        if not digits.isdigit():
            raise ValueError(f"bad fractional seconds in {text!r}")
        frac = digits
        s = head + tz
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    d = dt - _EPOCH
    ms = (d.days * 86_400 + d.seconds) * 1000 + d.microseconds // 1000
    if frac:
        ms += round(int(frac) * 1000 / 10 ** len(frac))
    return ms / 1000.0


def format_timestamp(t: float) -> str:
    ms = int(round(t * 1000.0))
    dt = _EPOCH + timedelta(milliseconds=ms)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ms % 1000:03d}Z"


def read_event_file(path) -> np.ndarray:
    """One timestamp per line (first column if delimited); header line optional."""
    out = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            field = line.split(",")[0].strip()
            if not field or field.startswith("#"):
                continue
            try:
                out.append(parse_timestamp(field))
            except ValueError as exc:
                if lineno == 1 and not out and not field[:1].isdigit():
                    continue  # header
                raise ParseError(path, lineno, f"bad timestamp {field!r} ({exc})") from None
    t = np.array(out, dtype=float)
    if t.size > 1 and np.any(np.diff(t) < 0):
        bad = int(np.argmax(np.diff(t) < 0)) + 2
        raise ParseError(path, bad, "event times are not sorted")
    return t


@dataclass(frozen=True)
class NewsRecord:
    timestamp: float
    currency: str
    importance: str
    description: str
    forecast: float | None = None
    actual: float | None = None
    unit_is_percentage: bool = False

    def __post_init__(self):
        if self.importance not in IMPORTANCE_RANK:
            raise ValueError(f"importance must be one of {list(IMPORTANCE_RANK)}")

    @property
    def rank(self) -> int:
        return IMPORTANCE_RANK[self.importance]


def _opt_float(s):
    s = s.strip().rstrip("%").strip()
    return None if s == "" else float(s)


def _flag(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "y", "t"):
        return True
    if v in ("0", "false", "no", "n", "f", ""):
        return False
    raise ValueError(f"bad boolean {s!r}")


def read_calendar(path) -> list[NewsRecord]:
    """Delimited calendar (see ``CALENDAR_COLUMNS``); header optional."""
    records = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if lineno == 1 and row[0].strip().lower() == "timestamp":
                continue
            if len(row) != len(CALENDAR_COLUMNS):
                raise ParseError(path, lineno,
                                 f"expected {len(CALENDAR_COLUMNS)} columns, got {len(row)}")
            try:
                records.append(NewsRecord(parse_timestamp(row[0]), row[1].strip(),
                                          row[2].strip().capitalize(), row[3].strip(),
                                          _opt_float(row[4]), _opt_float(row[5]), _flag(row[6])))
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
    return records


def write_calendar(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CALENDAR_COLUMNS)
        for r in records:
            w.writerow([format_timestamp(r.timestamp), r.currency, r.importance, r.description,
                        "" if r.forecast is None else repr(r.forecast),
                        "" if r.actual is None else repr(r.actual),
                        int(r.unit_is_percentage)])


# --- event preparation -------------------------------------------------------

def randomize_times(raw, seed: int = 0, resolution: float = 0.1,
                    t_start: float | None = None, t_end: float | None = None) -> EventSeries:
    """Subtract an independent U(0, resolution] jitter from each stamp.

    Stamps sharing a clock tick become distinct; exact collisions after
    jittering (measure zero, but possible in floating point) are redrawn.
    """
    raw = np.asarray(raw, dtype=float)
    rng = np.random.default_rng(seed)
    if raw.size == 0:
        t0 = 0.0 if t_start is None else t_start
        return EventSeries(np.empty(0), t0, t0 if t_end is None else t_end)
    raw = raw.copy()
    out = raw - resolution * (1.0 - rng.random(raw.size))
    while True:
        order = np.argsort(out, kind="stable")
        out, raw = out[order], raw[order]
        dup = np.flatnonzero(np.diff(out) <= 0)
        if dup.size == 0:
            break
        # redraw one member of each collision from its own tick
        out[dup] = raw[dup] - resolution * (1.0 - rng.random(dup.size))
    if t_start is None:
        t_start = float(out[0])
    if t_end is None:
        t_end = float(out[-1])
    return EventSeries(out, t_start, t_end)


def _hhmm(s: str) -> float:
    h, m = s.split(":")
    return int(h) * 3600.0 + int(m) * 60.0


def session_bounds(day_start: float, session=DEFAULT_SESSION) -> tuple[float, float]:
    return day_start + _hhmm(session[0]), day_start + _hhmm(session[1])


def is_weekday(t: float) -> bool:
    # 1970-01-01 was a Thursday
    return (int(t // DAY) + 3) % 7 < 5


def split_sessions(times, session=DEFAULT_SESSION) -> dict[int, EventSeries]:
    """Per-day session series keyed by day number (days since epoch); weekends dropped.

    Each series is shifted so the session opens at 0 and ends at its length.
    """
    t = np.asarray(times, dtype=float)
    out = {}
    if t.size == 0:
        return out
    for day in range(int(t[0] // DAY), int(t[-1] // DAY) + 1):
        d0 = day * DAY
        if not is_weekday(d0):
            continue
        lo, hi = session_bounds(d0, session)
        i, j = np.searchsorted(t, [lo, hi], side="left")
        if j > i:
            out[day] = EventSeries(t[i:j] - lo, 0.0, hi - lo)
    return out


# --- impact ------------------------------------------------------------------

def minute_counts(times, t0: float, t1: float) -> np.ndarray:
    """Events per whole minute on ``[t0, t1)``."""
    n = int(math.floor((t1 - t0) / 60.0 + 1e-9))
    edges = t0 + 60.0 * np.arange(n + 1)
    t = np.asarray(times, dtype=float)
    return np.histogram(t[(t >= t0) & (t < edges[-1])], bins=edges)[0]


@dataclass(frozen=True)
class ImpactSeries:
    """``theta_i = N_i / SMA_n(i)``; the SMA covers the n minutes before i only.

    ``sma`` and ``theta`` are NaN where there is not enough history or the
    SMA is zero.
    """

    minutes: np.ndarray
    counts: np.ndarray
    sma: np.ndarray
    theta: np.ndarray
    window_n: int


def impact_series(counts, window_n: int = 100, t0: float = 0.0) -> ImpactSeries:
    counts = np.asarray(counts)
    if window_n < 1:
        raise ValueError("window_n must be >= 1")
    c = counts.astype(float)
    cs = np.concatenate([[0.0], np.cumsum(c)])
    sma = np.full(c.size, np.nan)
    i = np.arange(window_n, c.size)
    sma[i] = (cs[i] - cs[i - window_n]) / window_n
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.where(sma > 0, c / sma, np.nan)
    minutes = t0 + 60.0 * np.arange(c.size)
    return ImpactSeries(minutes, counts, sma, theta, window_n)


def impact(counts, minute_index: int, window_n: int = 100) -> float:
    """theta for one minute; NaN when the SMA is zero."""
    if minute_index < window_n:
        raise InsufficientHistoryError(
            f"minute {minute_index} has fewer than {window_n} prior minutes")
    if minute_index >= len(counts):
        raise IndexError("minute index beyond the counts")
    return float(impact_series(np.asarray(counts)[:minute_index + 1], window_n).theta[-1])


def news_impact(event_times, news_time: float, window_n: int = 100) -> float:
    """theta of the minute starting at the news time, from full-day minute counts."""
    day0 = math.floor(news_time / DAY) * DAY
    t0 = day0 + 60.0 * math.floor((news_time - day0) / 60.0)
    start = t0 - 60.0 * window_n
    counts = minute_counts(event_times, start, t0 + 60.0)
    return impact(counts, window_n, window_n)


# --- surprise ----------------------------------------------------------------

@dataclass(frozen=True)
class SurpriseValue:
    s_abs: float
    s_rel: float
    s_combined: float


def surprise(record: NewsRecord) -> SurpriseValue | None:
    """Absolute and relative (percent) surprise; ``None`` without forecast/actual.

    The combined value is the absolute surprise for percentage indicators and
    the relative one otherwise. ``s_rel`` divides by ``|I_F|`` so it stays
    non-negative; it is NaN when the forecast is 0.
    """
    if record.forecast is None or record.actual is None:
        return None
    s_abs = abs(record.actual - record.forecast)
    s_rel = s_abs / abs(record.forecast) * 100.0 if record.forecast != 0 else math.nan
    return SurpriseValue(s_abs, s_rel, s_abs if record.unit_is_percentage else s_rel)


# --- isolated windows --------------------------------------------------------

def most_relevant(records) -> list[NewsRecord]:
    """Medium/High records, one per distinct time: highest importance, then
    lexicographically smallest description."""
    best = {}
    for r in records:
        if r.rank < IMPORTANCE_RANK["Medium"]:
            continue
        cur = best.get(r.timestamp)
        if cur is None or (-r.rank, r.description) < (-cur.rank, cur.description):
            best[r.timestamp] = r
    return [best[t] for t in sorted(best)]


@dataclass(frozen=True)
class IsolatedWindow:
    start: float
    end: float
    news_time: float
    record: NewsRecord

    @property
    def local_news_time(self) -> float:
        return self.news_time - self.start


def isolated_windows(calendar, session=DEFAULT_SESSION, half_width: float = 5400.0,
                     currencies=None) -> list[IsolatedWindow]:
    """Windows ``[z - h, z + h]`` inside a weekday session with no other
    Medium/High news in them (the boundary counts as inside)."""
    recs = list(calendar)
    if currencies is not None:
        recs = [r for r in recs if r.currency in set(currencies)]
    recs = most_relevant(recs)
    z = np.array([r.timestamp for r in recs])
    out = []
    for i, r in enumerate(recs):
        lo, hi = r.timestamp - half_width, r.timestamp + half_width
        d0 = math.floor(r.timestamp / DAY) * DAY
        s_lo, s_hi = session_bounds(d0, session)
        if not is_weekday(d0) or lo < s_lo or hi > s_hi:
            continue
        n_inside = np.searchsorted(z, hi, side="right") - np.searchsorted(z, lo, side="left")
        if n_inside == 1:
            out.append(IsolatedWindow(lo, hi, r.timestamp, r))
    return out


# --- conditional activity ----------------------------------------------------

@dataclass(frozen=True)
class ActivityCurve:
    """``P(theta > 1 | S in bin)``; NaN for empty bins."""

    edges: np.ndarray
    probability: np.ndarray
    counts: np.ndarray
    n_above: np.ndarray

    @property
    def stderr(self) -> np.ndarray:
        p = self.probability
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.sqrt(p * (1 - p) / self.counts)


def conditional_activity_curve(thetas, surprises, bins) -> ActivityCurve:
    """Bins are ``[e_k, e_{k+1})`` with the last one closed; unpaired or NaN
    observations and values outside the edges are ignored."""
    th = np.asarray(thetas, dtype=float)
    s = np.asarray(surprises, dtype=float)
    if th.shape != s.shape:
        raise ValueError("thetas and surprises must be paired")
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    ok = np.isfinite(th) & np.isfinite(s)
    counts = np.histogram(s[ok], bins=edges)[0]
    above = np.histogram(s[ok & (th > 1)], bins=edges)[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        prob = np.where(counts > 0, above / np.maximum(counts, 1), np.nan)
    return ActivityCurve(edges, prob, counts, above)
