"""Delimited-text tables with a leading ``#`` metadata block.

Layout::

    # newshawkes: <kind>
    # <key>: <value>
    # columns: a,b,c
    a,b,c
    1.0,2.0,3.0

Floats are written with ``repr`` so every value round-trips bit for bit.
"""
from __future__ import annotations

import csv
import io
import math
import os

import numpy as np

from .estimation import FitResult, get_variant
from .model import EventSeries, NewsTimes


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def write_table(path, kind: str, meta: dict, columns, rows) -> None:
    buf = io.StringIO()
    buf.write(f"# newshawkes: {kind}\n")
    for k, v in meta.items():
        text = fmt(v)
        if "\n" in text:
            raise ValueError(f"metadata value for {k!r} contains a newline")
        buf.write(f"# {k}: {text}\n")
    buf.write("# columns: " + ",".join(columns) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_table(path):
    """``(kind, meta, columns, rows)`` with every cell as a string."""
    meta = {}
    kind = None
    with open(path, newline="") as fh:
        lines = fh.read().split("\n")
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            if key == "newshawkes":
                kind = value
            elif key != "columns":
                meta[key] = value
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise ValueError(f"{path}: missing column header")
    return kind, meta, rows[0], rows[1:]


def floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split()], dtype=float) if text.strip() else np.empty(0)


def join_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


# --- event series ------------------------------------------------------------

def write_series(path, events: EventSeries, news, meta: dict) -> None:
    z = news.times if isinstance(news, NewsTimes) else np.asarray(news, float)
    m = dict(meta)
    m.update(t_start=events.t_start, t_end=events.t_end, news=join_floats(z))
    write_table(path, "events", m, ["time"], ([t] for t in events.times))


def read_series(path):
    """``(events, news, meta)``."""
    kind, meta, cols, rows = read_table(path)
    if kind != "events":
        raise ValueError(f"{path}: not an event file")
    t = np.array([float(r[0]) for r in rows], dtype=float)
    ev = EventSeries(t, float(meta["t_start"]), float(meta["t_end"]))
    return ev, NewsTimes(floats(meta.get("news", ""))), meta


# --- fit results -------------------------------------------------------------

FIT_COLUMNS = ["param", "value", "std_error", "at_bound", "fixed", "lower", "upper"]


def write_fit(path, fit: FitResult, meta: dict, big_m: int = 15, m: float = 5.0) -> None:
    mm = dict(meta)
    mm.update(variant=fit.variant, loglik=fit.loglik, aic=fit.aic, bic=fit.bic,
              converged=fit.converged, starts_tried=fit.starts_tried,
              n_events=fit.n_events, n_params=fit.n_params, fingerprint=fit.fingerprint,
              big_m=big_m, m=m)
    rows = []
    for k in get_variant(fit.variant).names:
        lo, hi = fit.bounds.get(k, (math.nan, math.nan))
        rows.append([k, fit.params[k], fit.std_errors[k], fit.boundary_flags[k],
                     k in fit.fixed, lo, hi])
    write_table(path, "fit", mm, FIT_COLUMNS, rows)


def read_fit(path) -> tuple[FitResult, dict]:
    kind, meta, cols, rows = read_table(path)
    if kind != "fit":
        raise ValueError(f"{path}: not a fit file")
    variant = get_variant(meta["variant"])
    params = {r[0]: float(r[1]) for r in rows}
    big_m, m = int(meta["big_m"]), float(meta["m"])
    fit = FitResult(
        variant=variant.name, spec=variant.build(params, big_m, m), params=params,
        loglik=float(meta["loglik"]), std_errors={r[0]: float(r[2]) for r in rows},
        aic=float(meta["aic"]), bic=float(meta["bic"]), converged=meta["converged"] == "1",
        starts_tried=int(meta["starts_tried"]),
        boundary_flags={r[0]: r[3] == "1" for r in rows},
        n_events=int(meta["n_events"]), n_params=int(meta["n_params"]),
        fingerprint=meta["fingerprint"],
        fixed=tuple(r[0] for r in rows if r[4] == "1"),
        bounds={r[0]: (float(r[5]), float(r[6])) for r in rows})
    return fit, meta
