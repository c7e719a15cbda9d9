"""``newshawkes`` command line: ingest, fit, compare, simulate, diagnose.

Every output directory gets a ``manifest.json`` (command, resolved config,
input fingerprints, seed, version) and a ``timing.json`` with wall-clock
information. Everything except ``timing.json`` is a pure function of the
manifest, so reruns are byte-identical.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 comparison refused.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .diagnostics import (DegenerateInputError, FingerprintMismatch, InsufficientDataError,
                          excess_dispersion_test, qq_export, residuals, select, welch_t_test)
from .estimation import VARIANTS, FitConfig, FitError, HessianWarning, fit, get_variant
from .model import EventSeries, NonStationaryError, data_fingerprint, decompose_intensity
from .newsflow import (DEFAULT_SESSION, DAY, ParseError, format_timestamp,
                       impact_series, isolated_windows, minute_counts, most_relevant,
                       news_impact, randomize_times, read_calendar, read_event_file,
                       session_bounds, split_sessions, surprise, write_calendar)
from .simulation import SimConfig, bin_counts, count_ratio_experiment, simulate
from .tables import read_fit, read_series, read_table, write_fit, write_series, write_table

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_REFUSED = 0, 2, 3, 4
OUTPUT_ROOT_ENV = "NEWSHAWKES_OUTPUT_ROOT"


class InputError(Exception):
    pass


# --- manifest and paths ------------------------------------------------------

def fingerprint_path(path) -> str:
    """sha256 of a file, or of a directory's files (relative names + contents).

    ``timing.json`` is skipped so fingerprints do not depend on run time.
    """
    h = hashlib.sha256()
    if os.path.isfile(path):
        with open(path, "rb") as fh:
            h.update(fh.read())
        return h.hexdigest()
    if not os.path.isdir(path):
        raise InputError(f"no such file or directory: {path}")
    for root, dirs, files in os.walk(path):
        dirs.sort()
        for name in sorted(files):
            if name == "timing.json":
                continue
            full = os.path.join(root, name)
            h.update(os.path.relpath(full, path).replace(os.sep, "/").encode() + b"\0")
            with open(full, "rb") as fh:
                h.update(hashlib.sha256(fh.read()).digest())
    return h.hexdigest()


class Run:
    """Output directory bound to a manifest."""

    def __init__(self, command, config: dict, inputs: dict, seed, out):
        self.manifest = {"command": command, "config": config, "inputs": inputs,
                         "seed": seed, "version": __version__}
        self.text = json.dumps(self.manifest, sort_keys=True, indent=2) + "\n"
        self.hash = hashlib.sha256(self.text.encode()).hexdigest()
        if out is None:
            root = os.environ.get(OUTPUT_ROOT_ENV)
            if not root:
                raise InputError(f"--out not given and {OUTPUT_ROOT_ENV} is not set")
            out = os.path.join(root, f"{command}-{self.hash[:12]}")
        self.out = out
        self.started = time.time()
        os.makedirs(out, exist_ok=True)
        with open(self.path("manifest.json"), "w") as fh:
            fh.write(self.text)

    def path(self, *parts) -> str:
        return os.path.join(self.out, *parts)

    def table(self, rel, kind, columns, rows, **meta):
        write_table(self.path(rel), kind, {"manifest": self.hash, **meta}, columns, rows)

    def finish(self, **extra):
        timing = {"started_utc": datetime.fromtimestamp(self.started, timezone.utc).isoformat(),
                  "wall_clock_seconds": round(time.time() - self.started, 3), **extra}
        with open(self.path("timing.json"), "w") as fh:
            json.dump(timing, fh, indent=2)
            fh.write("\n")
        print(self.out)


# --- dataset access ----------------------------------------------------------

def _session_arg(text: str):
    try:
        lo, hi = text.split("-")
        for part in (lo, hi):
            h, m = part.split(":")
            if not (0 <= int(h) <= 24 and 0 <= int(m) < 60):
                raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"session must look like 07:30-16:30, got {text!r}")
    return lo, hi


def _day_label(day: int) -> str:
    return format_timestamp(day * DAY)[:10]


def load_units(dataset: str, scope: str):
    """Sorted ``[(unit_id, events, news, meta)]`` for ``scope`` in a prepared dataset."""
    sub = {"per-day": "days", "per-window": "windows"}[scope]
    folder = os.path.join(dataset, sub)
    if not os.path.isdir(folder):
        raise InputError(f"{dataset} is not a prepared dataset (missing {sub}/)")
    units = []
    for name in sorted(os.listdir(folder)):
        if name.endswith(".txt"):
            ev, news, meta = read_series(os.path.join(folder, name))
            units.append((name[:-4], ev, news, meta))
    return units


def load_fits(fit_dir: str):
    folder = os.path.join(fit_dir, "fits")
    if not os.path.isdir(folder):
        raise InputError(f"{fit_dir} holds no fits (missing fits/)")
    out = {}
    for name in sorted(os.listdir(folder)):
        if name.endswith(".txt"):
            out[name[:-4]] = read_fit(os.path.join(folder, name))
    return out


# --- ingest ------------------------------------------------------------------

def cmd_ingest(args) -> int:
    for p in (args.events, args.calendar):
        if not os.path.isfile(p):
            raise InputError(f"no such file: {p}")
    config = {"session": "-".join(args.session), "half_width": args.half_width,
              "sma_window": args.sma_window, "currencies": args.currencies}
    run = Run("ingest", config, {"events": fingerprint_path(args.events),
                                 "calendar": fingerprint_path(args.calendar)}, args.seed, args.out)
    raw = read_event_file(args.events)
    records = read_calendar(args.calendar)
    currencies = args.currencies.split(",") if args.currencies else None
    if currencies:
        records = [r for r in records if r.currency in currencies]
    stream = randomize_times(raw, seed=args.seed)
    times = stream.times
    relevant = most_relevant(records)
    write_calendar(run.path("calendar.csv"), relevant)
    z_all = np.array([r.timestamp for r in relevant])

    for day, ev in split_sessions(times, args.session).items():
        lo, hi = session_bounds(day * DAY, args.session)
        z = z_all[(z_all >= lo) & (z_all <= hi)] - lo
        write_series(run.path("days", f"{_day_label(day)}.txt"), ev, z,
                     {"manifest": run.hash, "unit": _day_label(day), "origin": format_timestamp(lo)})
        counts = minute_counts(times, day * DAY, (day + 1) * DAY)
        imp = impact_series(counts, args.sma_window, t0=day * DAY)
        run.table(f"impact/{_day_label(day)}.txt", "impact", ["minute", "count", "sma", "theta"],
                  zip(map(format_timestamp, imp.minutes), imp.counts, imp.sma, imp.theta),
                  sma_window=args.sma_window)

    windows = isolated_windows(records, args.session, args.half_width)
    index = []
    for i, w in enumerate(windows):
        uid = f"w{i:04d}"
        a = np.searchsorted(times, w.start, side="left")
        b = np.searchsorted(times, w.end, side="right")
        ev = EventSeries(times[a:b] - w.start, 0.0, w.end - w.start)
        write_series(run.path("windows", f"{uid}.txt"), ev, [w.local_news_time],
                     {"manifest": run.hash, "unit": uid, "origin": format_timestamp(w.start)})
        theta = news_impact(times, w.news_time, args.sma_window)
        s = surprise(w.record)
        nan = math.nan
        index.append([uid, format_timestamp(w.news_time), w.record.currency, w.record.importance,
                      w.record.description, len(ev), theta,
                      s.s_abs if s else nan, s.s_rel if s else nan, s.s_combined if s else nan])
    run.table("windows.txt", "windows",
              ["unit", "news_time", "currency", "importance", "description", "n_events",
               "theta", "s_abs", "s_rel", "s_combined"], index,
              half_width=args.half_width, sma_window=args.sma_window,
              session="-".join(args.session))
    run.finish(n_events=int(times.size), n_windows=len(windows))
    return EXIT_OK


# --- fit ---------------------------------------------------------------------

def _fit_unit(job):
    uid, ev, news, variant, cfg = job
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HessianWarning)
            return uid, fit(variant, ev, news, cfg), None
    except (FitError, ValueError, FloatingPointError) as exc:
        return uid, None, f"{type(exc).__name__}: {exc}"


def cmd_fit(args) -> int:
    variant = get_variant(args.variant)
    config = {"variant": variant.name, "scope": args.scope, "starts": args.starts,
              "max_iters": args.max_iters, "big_m": args.big_m, "m": args.m,
              "units": sorted(args.unit) if args.unit else None}
    run = Run("fit", config, {"dataset": fingerprint_path(args.dataset)}, args.seed, args.out)
    cfg = FitConfig(n_starts=args.starts, seed=args.seed, max_iters=args.max_iters,
                    big_m=args.big_m, m=args.m)
    units = load_units(args.dataset, args.scope)
    if args.unit:
        units = [u for u in units if u[0] in set(args.unit)]
    jobs = [(uid, ev, news, variant.name, cfg) for uid, ev, news, _ in units]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_fit_unit, jobs))
    else:
        results = [_fit_unit(j) for j in jobs]
    summary, failures = [], []
    names = variant.names
    for uid, res, err in results:
        if err is not None:
            failures.append([uid, err])
            continue
        write_fit(run.path("fits", f"{uid}.txt"), res, {"manifest": run.hash, "unit": uid},
                  args.big_m, args.m)
        summary.append([uid, res.loglik, res.aic, res.bic, res.converged, res.n_events,
                        res.n_params] + [res.params[k] for k in names])
    run.table("fits.txt", "fit-summary",
              ["unit", "loglik", "aic", "bic", "converged", "n_events", "k"] + names, summary,
              variant=variant.name, scope=args.scope)
    run.table("failures.txt", "failures", ["unit", "error"], failures)
    run.finish(n_units=len(units), n_failed=len(failures))
    return EXIT_NUMERIC if failures else EXIT_OK


# --- compare -----------------------------------------------------------------

def _median_split(ids, values):
    """Rank split: lower half (ties by unit id) vs the rest; sizes differ by at most 1."""
    pairs = sorted((v, u) for u, v in zip(ids, values) if np.isfinite(v))
    half = (len(pairs) + 1) // 2
    return [u for _, u in pairs[:half]], [u for _, u in pairs[half:]]


def cmd_compare(args) -> int:
    inputs = {"a": fingerprint_path(args.a), "b": fingerprint_path(args.b)}
    if args.dataset:
        inputs["dataset"] = fingerprint_path(args.dataset)
    run = Run("compare", {}, inputs, None, args.out)
    fa, fb = load_fits(args.a), load_fits(args.b)
    common = sorted(set(fa) & set(fb))
    rows, deltas = [], {}
    for uid in common:
        a, b = fa[uid][0], fb[uid][0]
        try:
            rep = select({"a": a, "b": b})
        except FingerprintMismatch:
            print(f"refused: unit {uid} was fitted on different data", file=sys.stderr)
            return EXIT_REFUSED
        d_aic, d_bic = a.aic - b.aic, a.bic - b.bic
        deltas[uid] = (d_aic, d_bic)
        rows.append([uid, a.variant, b.variant, a.aic, b.aic, d_aic, a.bic, b.bic, d_bic,
                     rep.relative_likelihood["a"], rep.relative_likelihood["b"], rep.best_aic,
                     rep.best_bic])
    run.table("deltas.txt", "selection",
              ["unit", "variant_a", "variant_b", "aic_a", "aic_b", "delta_aic", "bic_a", "bic_b",
               "delta_bic", "rl_a", "rl_b", "best_aic", "best_bic"], rows,
              delta="a - b", only_in_a=" ".join(sorted(set(fa) - set(fb))),
              only_in_b=" ".join(sorted(set(fb) - set(fa))))
    if args.dataset and os.path.isfile(os.path.join(args.dataset, "windows.txt")):
        _, _, cols, wrows = read_table(os.path.join(args.dataset, "windows.txt"))
        info = {r[0]: dict(zip(cols, r)) for r in wrows if r[0] in deltas}
        ids = sorted(info)
        groups = []
        for key in ("theta", "s_combined"):
            vals = [float(info[u][key]) for u in ids]
            low, high = _median_split(ids, vals)
            groups += [(f"{key}_low", low), (f"{key}_high", high)]
        grows, trows = [], []
        for name, members in groups:
            da = np.array([deltas[u][0] for u in members])
            db = np.array([deltas[u][1] for u in members])
            grows.append([name, len(members)] + (
                [da.mean(), np.median(da), db.mean(), np.median(db), float(np.mean(da < 0))]
                if members else [math.nan] * 5))
        run.table("groups.txt", "selection-groups",
                  ["group", "count", "mean_delta_aic", "median_delta_aic", "mean_delta_bic",
                   "median_delta_bic", "frac_aic_negative"], grows)
        # parameter differences between high and low groups, fits of model a
        pnames = get_variant(fa[common[0]][0].variant).names if common else []
        for gi in (0, 2):
            (ln, low), (hn, high) = groups[gi], groups[gi + 1]
            for p in pnames:
                xa = [fa[u][0].params[p] for u in high]
                xb = [fa[u][0].params[p] for u in low]
                try:
                    w = welch_t_test(xa, xb)
                    trows.append([hn, ln, p, w.t, w.df, w.p_value])
                except (InsufficientDataError, DegenerateInputError):
                    trows.append([hn, ln, p, math.nan, math.nan, math.nan])
        run.table("welch.txt", "welch", ["group_1", "group_2", "param", "t", "df", "p_value"],
                  trows, model="a")
    run.finish(n_units=len(common))
    return EXIT_OK


# --- simulate ----------------------------------------------------------------

def _unit_seed(seed: int, uid: str) -> int:
    return int(hashlib.sha256(f"{seed}:{uid}".encode()).hexdigest()[:16], 16)


def cmd_simulate(args) -> int:
    inputs = {"fit": fingerprint_path(args.fit), "dataset": fingerprint_path(args.dataset)}
    if args.baseline:
        inputs["baseline"] = fingerprint_path(args.baseline)
    config = {"scope": args.scope, "replicas": args.replicas, "bin_width": args.bin_width,
              "write_replicas": args.write_replicas}
    run = Run("simulate", config, inputs, args.seed, args.out)
    fits = load_fits(args.fit)
    base = load_fits(args.baseline) if args.baseline else {}
    units = {u[0]: u for u in load_units(args.dataset, args.scope)}
    failures, summary = [], []
    for uid in sorted(fits):
        if uid not in units:
            failures.append([uid, "unit missing from dataset"])
            continue
        _, ev, news, _ = units[uid]
        res = fits[uid][0]
        cfg = SimConfig(seed=_unit_seed(args.seed, uid), n_replicas=args.replicas,
                        window=(ev.t_start, ev.t_end), news_times=news)
        try:
            series = simulate(res.spec, cfg)
        except NonStationaryError as exc:
            failures.append([uid, f"NonStationaryError: {exc}"])
            continue
        if args.write_replicas:
            for i, s in enumerate(series):
                write_series(run.path("replicas", uid, f"replica_{i:03d}.txt"), s, news,
                             {"manifest": run.hash, "unit": uid, "replica": i})
        binned = bin_counts(series, args.bin_width)
        real = np.histogram(ev.times, bins=binned.edges)[0]
        run.table(f"binned/{uid}.txt", "binned",
                  ["bin_lo", "bin_hi", "real", "sim_mean", "sim_std"],
                  zip(binned.edges[:-1], binned.edges[1:], real, binned.mean, binned.std),
                  replicas=args.replicas, bin_width=args.bin_width)
        if uid in base and len(news) and len(ev):
            rep = count_ratio_experiment(res, base[uid][0], ev, news, cfg, args.bin_width)
            w, o = rep.with_news, rep.without_news
            run.table(f"ratios/{uid}.txt", "count-ratio",
                      ["bin_lo", "bin_hi", "real", "ratio", "lower", "upper",
                       "ratio_baseline", "lower_baseline", "upper_baseline"],
                      zip(rep.edges[:-1], rep.edges[1:], rep.real_counts, w.ratio, w.lower,
                          w.upper, o.ratio, o.lower, o.upper), news_time=rep.news_time)
            summary.append([uid, w.post_news, w.post_news_std, w.pre_news, w.pre_news_std,
                            o.post_news, o.post_news_std, o.pre_news, o.pre_news_std])
    if summary:
        arr = np.array([r[1:] for r in summary], dtype=float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mean = np.nanmean(arr, axis=0)
        summary.append(["mean"] + list(mean))
    run.table("ratios.txt", "count-ratio-summary",
              ["unit", "post", "post_std", "pre", "pre_std", "post_baseline",
               "post_std_baseline", "pre_baseline", "pre_std_baseline"], summary)
    run.table("failures.txt", "failures", ["unit", "error"], failures)
    run.finish(n_units=len(fits), n_failed=len(failures))
    return EXIT_NUMERIC if failures else EXIT_OK


# --- diagnose ----------------------------------------------------------------

def cmd_diagnose(args) -> int:
    inputs = {"fit": fingerprint_path(args.fit), "dataset": fingerprint_path(args.dataset)}
    config = {"scope": args.scope, "grid_step": args.grid_step, "smooth": args.smooth,
              "level": args.level}
    run = Run("diagnose", config, inputs, None, args.out)
    fits = load_fits(args.fit)
    units = {u[0]: u for u in load_units(args.dataset, args.scope)}
    rows, failures = [], []
    for uid in sorted(fits):
        if uid not in units:
            failures.append([uid, "unit missing from dataset"])
            continue
        _, ev, news, _ = units[uid]
        res = fits[uid][0]
        if res.fingerprint != data_fingerprint(ev, news):
            failures.append([uid, "fit was made on different data"])
            continue
        r = residuals(res.spec, ev, news)
        run.table(f"residuals/{uid}.txt", "residuals", ["residual"], ([x] for x in r.residuals))
        if len(r):
            qq = qq_export(r)
            run.table(f"qq/{uid}.txt", "qq", ["theoretical", "empirical"],
                      zip(qq.theoretical, qq.empirical))
            lq = qq.log()
            run.table(f"qq_log/{uid}.txt", "qq-log", ["log_theoretical", "log_empirical"],
                      zip(lq.theoretical, lq.empirical))
        try:
            ed = excess_dispersion_test(r)
            rows.append([uid, ed.n, float(np.mean(r.residuals)), ed.statistic, ed.p_value,
                         ed.rejects(args.level)])
        except InsufficientDataError:
            rows.append([uid, len(r), float(np.mean(r.residuals)) if len(r) else math.nan,
                         math.nan, math.nan, False])
        grid = np.arange(ev.t_start, ev.t_end, args.grid_step)
        dec = decompose_intensity(res.spec, ev, news, grid, args.smooth)
        run.table(f"decomposition/{uid}.txt", "decomposition",
                  ["t", "baseline", "endogenous", "exogenous"],
                  ([d.t, d.baseline_frac, d.endo_frac, d.exo_frac] for d in dec),
                  smooth_window=args.smooth)
    run.table("ed.txt", "ed-test", ["unit", "n", "mean", "statistic", "p_value", "reject"], rows,
              level=args.level)
    run.table("failures.txt", "failures", ["unit", "error"], failures)
    run.finish(n_units=len(fits), n_failed=len(failures))
    return EXIT_NUMERIC if failures else EXIT_OK


# --- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="newshawkes", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--out", help=f"output directory (default: ${OUTPUT_ROOT_ENV}/<command>-<hash>)")
        sp.add_argument("--config", help="key=value file; flags given on the command line win")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("ingest", help="prepare a dataset from event and calendar files")
    sp.add_argument("--events", required=True)
    sp.add_argument("--calendar", required=True)
    sp.add_argument("--session", type=_session_arg, default=DEFAULT_SESSION)
    sp.add_argument("--half-width", type=float, default=5400.0)
    sp.add_argument("--sma-window", type=int, default=100)
    sp.add_argument("--currencies", default="", help="comma-separated calendar currencies to keep")
    common(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("fit", help="fit a model variant per day or per window")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--variant", choices=sorted(VARIANTS), required=True)
    sp.add_argument("--scope", choices=["per-day", "per-window"], default="per-window")
    sp.add_argument("--starts", type=int, default=10)
    sp.add_argument("--max-iters", type=int, default=1000)
    sp.add_argument("--big-m", type=int, default=15)
    sp.add_argument("--m", type=float, default=5.0)
    sp.add_argument("--unit", action="append", help="restrict to these unit ids")
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("compare", help="AIC/BIC comparison of two fit runs on the same data")
    sp.add_argument("--a", required=True, help="fit output directory (deltas are a - b)")
    sp.add_argument("--b", required=True)
    sp.add_argument("--dataset", help="dataset for the theta / surprise median splits")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("simulate", help="simulate fitted models, binned counts and count ratios")
    sp.add_argument("--fit", required=True)
    sp.add_argument("--baseline", help="fit run of the comparison model for count ratios")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--scope", choices=["per-day", "per-window"], default="per-window")
    sp.add_argument("--replicas", type=int, default=25)
    sp.add_argument("--bin-width", type=float, default=300.0)
    sp.add_argument("--write-replicas", type=int, choices=[0, 1], default=1)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("diagnose", help="residuals, ED test, QQ data and decomposition")
    sp.add_argument("--fit", required=True)
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--scope", choices=["per-day", "per-window"], default="per-window")
    sp.add_argument("--grid-step", type=float, default=1.0)
    sp.add_argument("--smooth", type=float, default=100.0)
    sp.add_argument("--level", type=float, default=0.05)
    common(sp, seed=False)
    sp.set_defaults(func=cmd_diagnose)
    return p


def _read_config(path) -> dict:
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise InputError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _config_path(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def parse_args(argv):
    """Parse ``argv``; values from ``--config`` act as defaults that flags override."""
    parser = build_parser()
    path = _config_path(argv)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if not a.startswith("-")), None)
    if path is None or command not in sub.choices:
        return parser.parse_args(argv)
    sp = sub.choices[command]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, text in _read_config(path).items():
        act = actions.get(key)
        if act is None or key in ("config", "help"):
            raise InputError(f"unknown config key {key!r} for {command}")
        try:
            val = act.type(text) if act.type else text
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InputError(f"bad config value for {key}: {exc}") from None
        if act.choices is not None and val not in act.choices:
            raise InputError(f"config {key} must be one of {sorted(act.choices)}")
        if isinstance(act, argparse._AppendAction):
            # argparse appends to a list default; a flag on the command line replaces it
            if any(a == o or a.startswith(o + "=") for a in argv for o in act.option_strings):
                continue
            val = [val]
        defaults[key] = val
        act.required = False
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (InputError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FingerprintMismatch as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (FitError, NonStationaryError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
