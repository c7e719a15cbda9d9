"""Thinning simulation and the calibrated count-ratio experiment."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import core
from .model import EventSeries, HawkesSpec, NewsTimes, NonStationaryError, _news_array


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_replicas: int = 25
    window: tuple[float, float] = (0.0, 10_800.0)
    news_times: NewsTimes = field(default_factory=NewsTimes)

    def __post_init__(self):
        if self.n_replicas < 1:
            raise ValueError("n_replicas must be >= 1")
        t0, t1 = self.window
        if not t1 > t0:
            raise ValueError("window must have positive length")
        if not isinstance(self.news_times, NewsTimes):
            object.__setattr__(self, "news_times", NewsTimes(self.news_times))


def replica_rngs(seed: int, n_replicas: int) -> list[np.random.Generator]:
    """Independent generator per replica, a function of ``(seed, replica index)`` only."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_replicas)]


def simulate_once(spec: HawkesSpec, t_start: float, t_end: float, news,
                  rng: np.random.Generator) -> EventSeries:
    if not spec.is_stationary:
        raise NonStationaryError(spec.branching_ratio)
    mu, amps, rates, ac, bc, anc, bnc = spec.core_args()
    times = core.simulate_thinning(float(t_start), float(t_end), mu, amps, rates,
                                   _news_array(news), ac, bc, anc, bnc, rng)
    return EventSeries(times, t_start, t_end)


def simulate(spec: HawkesSpec, config: SimConfig) -> list[EventSeries]:
    """Draw ``config.n_replicas`` independent realisations on ``config.window``."""
    if not spec.is_stationary:
        raise NonStationaryError(spec.branching_ratio)
    t0, t1 = config.window
    return [simulate_once(spec, t0, t1, config.news_times, rng)
            for rng in replica_rngs(config.seed, config.n_replicas)]


def simulate_branching(mu: float, n: float, beta: float, t_end: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Cluster construction for a single-exponential kernel ``n*beta*exp(-beta*t)``.

    Immigrants arrive as Poisson(mu); each event has Poisson(n) children at
    Exp(beta) delays. Kept independent of the thinning code on purpose.
    """
    gen = rng.uniform(0.0, t_end, rng.poisson(mu * t_end))
    out = [gen]
    while gen.size:
        kids = rng.poisson(n, gen.size)
        parents = np.repeat(gen, kids)
        gen = parents + rng.exponential(1.0 / beta, parents.size)
        gen = gen[gen < t_end]
        out.append(gen)
    return np.sort(np.concatenate(out))


@dataclass(frozen=True)
class BinnedCounts:
    """Event counts per bin (rows: replicas) on ``edges``."""

    edges: np.ndarray
    counts: np.ndarray

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def mean(self) -> np.ndarray:
        return self.counts.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.counts.std(axis=0)


def bin_edges(t_start: float, t_end: float, bin_width: float) -> np.ndarray:
    n_bins = int(np.ceil((t_end - t_start) / bin_width - 1e-9))
    edges = t_start + bin_width * np.arange(n_bins + 1)
    edges[-1] = t_end
    return edges


def bin_counts(series: list[EventSeries], bin_width: float = 300.0,
               edges: np.ndarray | None = None) -> BinnedCounts:
    """Histogram each series; the last bin is closed on the right so nothing is lost."""
    if edges is None:
        edges = bin_edges(series[0].t_start, series[0].t_end, bin_width)
    counts = np.array([np.histogram(s.times, bins=edges)[0] for s in series], dtype=np.int64)
    return BinnedCounts(np.asarray(edges, float), counts.reshape(len(series), -1))


@dataclass
class ModelRatios:
    """``<N_sim>/N_real`` per bin with one-sigma bands (NaN where ``N_real = 0``)."""

    ratio: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    post_news: float
    post_news_std: float
    pre_news: float
    pre_news_std: float
    simulated: BinnedCounts


@dataclass
class CountRatioReport:
    edges: np.ndarray
    real_counts: np.ndarray
    news_time: float
    with_news: ModelRatios
    without_news: ModelRatios


def _ratio(sim: np.ndarray, real: np.ndarray):
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(real > 0, sim.mean(axis=0) / real, np.nan)
        s = np.where(real > 0, sim.std(axis=0) / real, np.nan)
    return r, s


def _window_ratio(series, real: EventSeries, lo: float, hi: float):
    n_real = np.count_nonzero((real.times >= lo) & (real.times < hi))
    if n_real == 0:
        return np.nan, np.nan
    sim = np.array([np.count_nonzero((s.times >= lo) & (s.times < hi)) for s in series])
    return sim.mean() / n_real, sim.std() / n_real


def _model_ratios(spec, real, news, config, edges, real_counts, z, summary_width):
    series = simulate(spec, SimConfig(config.seed, config.n_replicas,
                                      (real.t_start, real.t_end), news))
    binned = bin_counts(series, edges=edges)
    r, s = _ratio(binned.counts, real_counts)
    post, post_s = _window_ratio(series, real, z, z + summary_width)
    pre, pre_s = _window_ratio(series, real, z - summary_width, z)
    return ModelRatios(r, r - s, r + s, post, post_s, pre, pre_s, binned)


def count_ratio_experiment(fit_with_news, fit_without_news, real_events: EventSeries,
                           news, config: SimConfig, bin_width: float = 300.0,
                           summary_width: float = 300.0) -> CountRatioReport:
    """Compare binned counts simulated from two fitted models with the real counts.

    ``fit_*`` are :class:`~newshawkes.estimation.FitResult` objects (or bare
    :class:`HawkesSpec`). Both models are simulated on the real window with the
    same seed. Summary ratios use the ``summary_width`` seconds after (and
    before) the first news time.
    """
    z_all = _news_array(news)
    if z_all.size == 0:
        raise ValueError("count-ratio experiment needs at least one news time")
    if len(real_events) == 0:
        raise ValueError("no real events")
    z = float(z_all[0])
    specs = [getattr(f, "spec", f) for f in (fit_with_news, fit_without_news)]
    edges = bin_edges(real_events.t_start, real_events.t_end, bin_width)
    real_counts = np.histogram(real_events.times, bins=edges)[0]
    news_obj = NewsTimes(z_all)
    with_news, without = (_model_ratios(s, real_events, news_obj, config, edges,
                                        real_counts, z, summary_width) for s in specs)
    return CountRatioReport(edges, real_counts, z, with_news, without)


def average_ratios(reports: list[CountRatioReport]) -> dict[str, np.ndarray]:
    """Group average of per-bin and summary ratios, ignoring undefined entries.

    Bins are aligned by offset from the news time, so all windows must share
    the bin layout relative to their news.
    """
    out = {}
    for key in ("with_news", "without_news"):
        per_bin = np.array([getattr(r, key).ratio for r in reports])
        out[f"{key}_bins"] = np.nanmean(per_bin, axis=0)
        out[f"{key}_post"] = np.nanmean([getattr(r, key).post_news for r in reports])
        out[f"{key}_pre"] = np.nanmean([getattr(r, key).pre_news for r in reports])
    return out
