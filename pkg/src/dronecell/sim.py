"""Snapshot Monte-Carlo engine.

Each timeslot is independent: the number of active users is Poisson (or a
fixed count), users are placed uniformly over the cell disc, every enabled
strategy is evaluated on the same user set, and per-user rates plus
per-slot drone travel distances are pooled into empirical statistics.

Randomness is drawn from counter-based streams keyed by
(seed, timeslot, draw purpose), so a run is bit-reproducible for any
worker count and any chunking of the timeslot range.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import rate_function
from .design import CellGeometry, solve_edge_angle
from .params import ScenarioParams
from .placement import (PlacementResult, Strategy, UserSet, min_enclosing_circle,
                        solve_mar_batch, cmp_position, mar_position, sbc_position,
                        static_position)

_CHUNK_SLOTS = 4096
_DRAW_COUNT = 0
_DRAW_POSITION = 1

ALL_STRATEGIES = (Strategy.STATIC, Strategy.SBC, Strategy.MAR, Strategy.CMP)


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign.

    lam is the mean number of active users per timeslot; fixed_n overrides
    the Poisson draw with a constant count. d_max only sets the metric
    scale: rates and travel distances depend on the cell proportions, not
    its absolute size.
    """

    scenario: ScenarioParams
    lam: float = 5.0
    fixed_n: Optional[int] = None
    n_timeslots: int = 100_000
    seed: int = 0
    strategies: tuple[Strategy, ...] = ALL_STRATEGIES
    d_max: float = 500.0

    def __post_init__(self) -> None:
        strategies = tuple(Strategy(s) for s in self.strategies)
        if len(set(strategies)) != len(strategies):
            raise ValueError("duplicate strategies requested")
        if not strategies:
            raise ValueError("at least one strategy must be enabled")
        object.__setattr__(self, "strategies", strategies)
        if self.fixed_n is None:
            if not self.lam > 0.0:
                raise ValueError(f"lambda must be positive, got {self.lam}")
        elif self.fixed_n < 1:
            raise ValueError(f"fixed_n must be >= 1, got {self.fixed_n}")
        if self.n_timeslots < 1:
            raise ValueError(f"n_timeslots must be >= 1, got {self.n_timeslots}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if not self.d_max > 0.0:
            raise ValueError(f"cell radius must be positive, got {self.d_max}")


@dataclass(frozen=True, eq=False)
class TimeslotResult:
    """Placements of every enabled strategy for one timeslot."""

    index: int
    users: np.ndarray
    placements: dict[Strategy, PlacementResult]
    travel: dict[Strategy, float]  # displacement since the previous slot, / d_max

    @property
    def n_users(self) -> int:
        return self.users.shape[0]


@dataclass(frozen=True, eq=False)
class StrategyStats:
    """Pooled per-user rate and per-slot travel statistics of one strategy."""

    strategy: Strategy
    n_user_samples: int
    mean_rate: float
    p5_rate: float
    frac_rate_above_1: float
    frac_kappa_above_1: float
    mean_travel: float
    rate_samples: np.ndarray    # sorted, one entry per user per slot
    travel_samples: np.ndarray  # sorted, one entry per slot


@dataclass(frozen=True, eq=False)
class SummaryStats:
    """Result of a simulation campaign."""

    config: SimConfig
    geometry: CellGeometry
    n_timeslots: int
    n_users_total: int
    per_strategy: dict[Strategy, StrategyStats]
    timeslots: Optional[list] = None


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _stream(seed: int, timeslot: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(timeslot, purpose))
    return np.random.Generator(np.random.Philox(ss))


def sample_user_count(lam: float, rng: np.random.Generator) -> int:
    """Poisson-distributed number of active users in one timeslot."""
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return int(rng.poisson(lam))


def sample_users_uniform_disc(n: int, d_max: float, rng: np.random.Generator,
                              center=(0.0, 0.0)) -> np.ndarray:
    """n user positions uniform over the disc of radius d_max, shape (n, 2)."""
    if n < 0:
        raise ValueError(f"user count must be non-negative, got {n}")
    r = d_max * np.sqrt(rng.random(n))
    phi = 2.0 * math.pi * rng.random(n)
    c = np.asarray(center, dtype=float)
    return np.stack([c[0] + r * np.cos(phi), c[1] + r * np.sin(phi)], axis=1)


def _slot_users(config: SimConfig, timeslot: int) -> np.ndarray:
    if config.fixed_n is not None:
        n = config.fixed_n
    else:
        n = sample_user_count(config.lam, _stream(config.seed, timeslot, _DRAW_COUNT))
    return sample_users_uniform_disc(n, config.d_max,
                                     _stream(config.seed, timeslot, _DRAW_POSITION))


# ---------------------------------------------------------------------------
# Per-slot evaluation (contract path, used for small runs and tests)
# ---------------------------------------------------------------------------

def run_timeslot(users: UserSet, config: SimConfig, geometry: CellGeometry,
                 prev_positions: Optional[dict] = None) -> TimeslotResult:
    """Evaluate every enabled strategy on one user set.

    prev_positions maps each strategy to its previous drone position
    (defaults to the cell center, the position before the first slot).
    """
    theta = geometry.theta_edge_deg
    params = config.scenario
    if prev_positions is None:
        prev_positions = {s: users.cell_center for s in config.strategies}
    placements: dict[Strategy, PlacementResult] = {}
    travel: dict[Strategy, float] = {}
    for s in config.strategies:
        if s is Strategy.STATIC:
            res = static_position(users, theta, params)
        elif s is Strategy.SBC:
            res = sbc_position(users, theta, params)
        elif s is Strategy.MAR:
            res = mar_position(users, theta, params)
        else:
            res = cmp_position(users, theta, params)
        placements[s] = res
        prev = np.asarray(prev_positions[s], dtype=float)
        travel[s] = float(math.hypot(*(res.position - prev)) / users.d_max)
    return TimeslotResult(index=0, users=users.users, placements=placements,
                          travel=travel)


# ---------------------------------------------------------------------------
# Chunked engine
# ---------------------------------------------------------------------------

def _needed_strategies(requested: tuple[Strategy, ...]) -> set[Strategy]:
    need = set(requested)
    if Strategy.CMP in need:
        need |= {Strategy.SBC, Strategy.MAR}
    if Strategy.MAR in need:
        need.add(Strategy.SBC)  # the SBC center seeds the MAR search
    return need


def _run_chunk(config: SimConfig, start: int, stop: int) -> dict:
    """Simulate timeslots [start, stop) and return normalized-frame arrays."""
    length = stop - start
    counts = np.empty(length, dtype=np.int64)
    users_list = []
    for t in range(start, stop):
        pts = _slot_users(config, t) / config.d_max
        counts[t - start] = pts.shape[0]
        users_list.append(pts)
    users_flat = (np.concatenate(users_list, axis=0) if users_list
                  else np.empty((0, 2)))

    need = _needed_strategies(config.strategies)
    positions: dict[Strategy, np.ndarray] = {}
    if Strategy.STATIC in need:
        positions[Strategy.STATIC] = np.zeros((length, 2))
    if Strategy.SBC in need:
        sbc = np.zeros((length, 2))
        for i, pts in enumerate(users_list):
            if pts.shape[0]:
                sbc[i], _ = min_enclosing_circle(pts)
        positions[Strategy.SBC] = sbc
    if Strategy.MAR in need:
        theta = solve_edge_angle(config.scenario)
        rate = rate_function(theta, config.scenario)
        mar = np.zeros((length, 2))
        by_n: dict[int, list[int]] = {}
        for i, c in enumerate(counts):
            if c > 0:
                by_n.setdefault(int(c), []).append(i)
        for n, rows in sorted(by_n.items()):
            batch = np.stack([users_list[i] for i in rows], axis=0)
            centers = positions[Strategy.SBC][rows]
            pos, _ = solve_mar_batch(batch, rate, centers)
            mar[rows] = pos
        positions[Strategy.MAR] = mar
    if Strategy.CMP in need:
        d_sbc = np.hypot(*positions[Strategy.SBC].T)
        d_mar = np.hypot(*positions[Strategy.MAR].T)
        use_sbc = d_sbc <= d_mar
        positions[Strategy.CMP] = np.where(use_sbc[:, None],
                                           positions[Strategy.SBC],
                                           positions[Strategy.MAR])
    return {
        "counts": counts,
        "users": users_flat,
        "positions": {s: positions[s] for s in config.strategies},
    }


def _chunk_worker(args) -> dict:
    return _run_chunk(*args)


def _nearest_rank(sorted_vals: np.ndarray, pct: float) -> float:
    n = len(sorted_vals)
    if n == 0:
        return math.nan
    rank = max(1, math.ceil(pct / 100.0 * n))
    return float(sorted_vals[min(rank, n) - 1])


def _strategy_stats(strategy: Strategy, rates: np.ndarray, kappas: np.ndarray,
                    travel: np.ndarray) -> StrategyStats:
    n = rates.size
    rates_sorted = np.sort(rates)
    travel_sorted = np.sort(travel)
    return StrategyStats(
        strategy=strategy,
        n_user_samples=int(n),
        mean_rate=float(np.mean(rates)) if n else math.nan,
        p5_rate=_nearest_rank(rates_sorted, 5.0),
        frac_rate_above_1=float(np.count_nonzero(rates > 1.0) / n) if n else math.nan,
        frac_kappa_above_1=float(np.count_nonzero(kappas > 1.0) / n) if n else math.nan,
        mean_travel=float(np.mean(travel)),
        rate_samples=rates_sorted,
        travel_samples=travel_sorted,
    )


def run_simulation(config: SimConfig, workers: int = 1,
                   keep_timeslots: bool = False) -> SummaryStats:
    """Run the campaign and pool the statistics.

    Identical config and seed give bit-identical results for any worker
    count. With keep_timeslots=True the full per-slot log is attached
    (memory-heavy for large runs).
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    theta = solve_edge_angle(config.scenario)
    geometry = CellGeometry.from_edge_angle(theta, config.d_max)
    rate = rate_function(theta, config.scenario)

    bounds = list(range(0, config.n_timeslots, _CHUNK_SLOTS)) + [config.n_timeslots]
    tasks = [(config, bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
    if workers == 1 or len(tasks) == 1:
        chunks = [_chunk_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_chunk_worker, tasks))

    counts = np.concatenate([c["counts"] for c in chunks])
    users = np.concatenate([c["users"] for c in chunks], axis=0)
    slot_of_user = np.repeat(np.arange(config.n_timeslots), counts)
    n_users_total = int(counts.sum())

    per_strategy: dict[Strategy, StrategyStats] = {}
    positions_by_strategy: dict[Strategy, np.ndarray] = {}
    for s in config.strategies:
        pos = np.concatenate([c["positions"][s] for c in chunks], axis=0)
        positions_by_strategy[s] = pos
        pu = pos[slot_of_user]
        kappas = np.hypot(users[:, 0] - pu[:, 0], users[:, 1] - pu[:, 1])
        rates = rate(kappas)
        prev = np.vstack([np.zeros(2), pos[:-1]])
        travel = np.hypot(pos[:, 0] - prev[:, 0], pos[:, 1] - prev[:, 1])
        per_strategy[s] = _strategy_stats(s, rates, kappas, travel)

    timeslots = None
    if keep_timeslots:
        timeslots = _build_timeslot_log(config, geometry, rate, counts, users,
                                        positions_by_strategy)
    return SummaryStats(config=config, geometry=geometry,
                        n_timeslots=config.n_timeslots,
                        n_users_total=n_users_total,
                        per_strategy=per_strategy, timeslots=timeslots)


def _build_timeslot_log(config, geometry, rate, counts, users,
                        positions_by_strategy) -> list:
    offsets = np.concatenate([[0], np.cumsum(counts)])
    log = []
    prev = {s: np.zeros(2) for s in config.strategies}
    for t in range(config.n_timeslots):
        pts = users[offsets[t]:offsets[t + 1]]
        placements = {}
        travel = {}
        for s in config.strategies:
            pos = positions_by_strategy[s][t]
            kappas = np.hypot(pts[:, 0] - pos[0], pts[:, 1] - pos[1])
            placements[s] = PlacementResult(
                strategy=s, position=pos * config.d_max, kappas=kappas,
                aggregate_rate=float(np.sum(rate(kappas))))
            travel[s] = float(math.hypot(*(pos - prev[s])))
            prev[s] = pos
        log.append(TimeslotResult(index=t, users=pts * config.d_max,
                                  placements=placements, travel=travel))
    return log


# ---------------------------------------------------------------------------
# Empirical distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Ecdf:
    """Step empirical CDF over a sorted sample set."""

    values: np.ndarray
    probs: np.ndarray

    def __call__(self, x):
        out = np.searchsorted(self.values, np.asarray(x, dtype=float),
                              side="right") / len(self.values)
        return float(out) if np.ndim(x) == 0 else out

    def percentile(self, pct: float) -> float:
        """Nearest-rank percentile, pct in (0, 100]."""
        return _nearest_rank(self.values, pct)

    def __iter__(self):
        return iter(zip(self.values, self.probs))


def empirical_cdf(samples) -> Ecdf:
    """Empirical CDF of a non-empty sample set."""
    vals = np.sort(np.asarray(samples, dtype=float).ravel())
    if vals.size == 0:
        raise ValueError("need at least one sample")
    probs = np.arange(1, vals.size + 1) / vals.size
    return Ecdf(values=vals, probs=probs)
