"""Simulators: the discrete-time jump chain and a timed event-driven
variant with service and pickup delays, plus exponent estimation and
fleet-size accounting."""

from __future__ import annotations

import heapq
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .lp import solve_transportation
from .network import Network
from .policies import DROP, Policy

DEFAULT_JUMP_WARMUP_FRAC = 0.1
DEFAULT_TIMED_WARMUP_FRAC = 0.2
_SAMPLE_BLOCK = 1 << 16


@dataclass
class SimReport:
    arrivals: int
    drops: int
    drop_fraction: float
    drop_fraction_by_origin: np.ndarray
    occupancy_mean: np.ndarray      # time-average normalized queue vector
    warmup_steps: int
    seed: int
    wall_time: float
    # timed mode extras (None in jump mode)
    mean_in_transit: float | None = None
    served: int | None = None
    mean_trip_minutes: float | None = None

    def __post_init__(self):
        assert self.drops <= self.arrivals


@dataclass
class TimedConfig:
    total_rate: float               # arrivals per minute
    horizon_minutes: float
    k_tot: int
    init: object = "proportional"   # explicit vector or "proportional"
    warmup_frac: float = DEFAULT_TIMED_WARMUP_FRAC

    def __post_init__(self):
        if self.total_rate <= 0:
            raise ValueError("total_rate must be positive")


def proportional_init(weights, K: int) -> np.ndarray:
    """Integer placement of K units proportional to weights (largest remainders)."""
    w = np.array(weights, dtype=float)
    w = w / w.sum()
    exact = w * K
    base = np.floor(exact).astype(np.int64)
    short = K - int(base.sum())
    if short > 0:
        order = np.argsort(-(exact - base))
        base[order[:short]] += 1
    return base


def _event_sampler(net: Network, rng):
    """Yield (origin, destination) pairs drawn from phi, block-buffered."""
    m, n = net.phi.shape
    flat = net.phi.ravel()
    while True:
        draws = rng.choice(m * n, size=_SAMPLE_BLOCK, p=flat)
        for d in draws:
            yield d // n, d % n


def run_jump_chain(net: Network, policy: Policy, K: int, steps: int,
                   warmup: int | None = None, seed: int = 0,
                   init=None, check_conservation: bool = False) -> SimReport:
    """Simulate the embedded chain: one demand arrival per step.

    Each step samples an (origin, destination) pair from phi and applies
    the policy; a served unit moves from its source queue to the
    destination.  Statistics are collected after ``warmup`` steps
    (default: 10% of steps).
    """
    t0 = time.perf_counter()
    if warmup is None:
        warmup = int(steps * DEFAULT_JUMP_WARMUP_FRAC)
    if not 0 <= warmup < steps:
        raise ValueError("need steps > warmup >= 0")
    n = net.n_supply
    if init is None or (isinstance(init, str) and init == "proportional"):
        q = proportional_init(policy.rest_weights(n), K)
    else:
        q = np.array(init, dtype=np.int64)
        if q.sum() != K or np.any(q < 0):
            raise ValueError("initial queues must be nonnegative and sum to K")
    q = q.copy()

    rng = np.random.default_rng(seed)
    events = _event_sampler(net, rng)
    arrivals = drops = 0
    drops_by_origin = np.zeros(net.n_demand, dtype=np.int64)
    arrivals_by_origin = np.zeros(net.n_demand, dtype=np.int64)
    occ = np.zeros(n)
    dispatch = policy.dispatch

    for t in range(steps):
        origin, dest = next(events)
        dec = dispatch(q, origin, rng)
        src = dec.source
        if src != DROP:
            q[src] -= 1
            q[dest] += 1
        if check_conservation:
            assert q.sum() == K and np.all(q >= 0)
        if t >= warmup:
            arrivals += 1
            arrivals_by_origin[origin] += 1
            if src == DROP:
                drops += 1
                drops_by_origin[origin] += 1
            occ += q

    measured = steps - warmup
    with np.errstate(invalid="ignore", divide="ignore"):
        by_origin = np.where(arrivals_by_origin > 0,
                             drops_by_origin / np.maximum(arrivals_by_origin, 1),
                             0.0)
    return SimReport(
        arrivals=arrivals, drops=drops,
        drop_fraction=drops / arrivals if arrivals else 1.0,
        drop_fraction_by_origin=by_origin,
        occupancy_mean=occ / (measured * max(K, 1)),
        warmup_steps=warmup, seed=seed,
        wall_time=time.perf_counter() - t0,
    )


def run_timed(net: Network, policy: Policy, cfg: TimedConfig,
              with_pickup: bool = False, seed: int = 0,
              init=None, check_conservation: bool = False) -> SimReport:
    """Event-driven simulation with travel (and optionally pickup) delays.

    Poisson arrivals at cfg.total_rate with type distribution phi.  A
    dispatch from i for origin j and destination k removes a unit from
    queue i; it re-enters queue k after pickup_time[i, j] (when enabled)
    plus travel_time[j, k] minutes.  The first warmup_frac of the horizon
    is discarded.
    """
    t0 = time.perf_counter()
    if net.travel_time is None:
        raise ValueError("timed mode requires a travel time matrix")
    if with_pickup and net.pickup_time is None:
        raise ValueError("with_pickup requires a pickup time matrix")
    if net.n_demand > net.n_supply:
        raise ValueError("timed mode maps demand nodes onto supply zones; "
                         "needs n_demand <= n_supply")

    n = net.n_supply
    if init is None or (isinstance(init, str) and init == "proportional"):
        q = proportional_init(policy.rest_weights(n), cfg.k_tot)
    else:
        q = np.array(init, dtype=np.int64)
        if q.sum() != cfg.k_tot or np.any(q < 0):
            raise ValueError("initial queues must be nonnegative and sum to k_tot")
    q = q.copy()

    rng = np.random.default_rng(seed)
    events = _event_sampler(net, rng)
    in_transit = []     # heap of (return time, destination)
    warmup_t = cfg.warmup_frac * cfg.horizon_minutes
    if warmup_t >= cfg.horizon_minutes:
        raise ValueError("horizon too short to leave the warmup window")

    clock = 0.0
    arrivals = drops = served = 0
    drops_by_origin = np.zeros(net.n_demand, dtype=np.int64)
    arrivals_by_origin = np.zeros(net.n_demand, dtype=np.int64)
    occ = np.zeros(n)
    transit_area = 0.0   # time integral of in-transit count after warmup
    trip_minutes = 0.0
    last_t = 0.0
    dispatch = policy.dispatch

    def advance(t):
        # accumulate in-transit area up to t (clipped to the measured window)
        nonlocal transit_area, last_t
        lo, hi = max(last_t, warmup_t), min(t, cfg.horizon_minutes)
        if hi > lo:
            transit_area += (hi - lo) * len(in_transit)
        last_t = t

    while True:
        clock += rng.exponential(1.0 / cfg.total_rate)
        if clock > cfg.horizon_minutes:
            advance(clock)
            break
        while in_transit and in_transit[0][0] <= clock:
            rt, dest = in_transit[0]
            advance(rt)
            heapq.heappop(in_transit)
            q[dest] += 1
        advance(clock)

        origin, dest = next(events)
        dec = dispatch(q, origin, rng)
        src = dec.source
        measured = clock > warmup_t
        if measured:
            arrivals += 1
            arrivals_by_origin[origin] += 1
        if src != DROP:
            q[src] -= 1
            trip = net.travel_time[origin, dest]
            if with_pickup:
                trip += net.pickup_time[src, origin]
            heapq.heappush(in_transit, (clock + trip, dest))
            if measured:
                served += 1
                trip_minutes += trip
                occ += q
        elif measured:
            drops += 1
            drops_by_origin[origin] += 1
            occ += q
        if check_conservation:
            assert q.sum() + len(in_transit) == cfg.k_tot and np.all(q >= 0)

    span = cfg.horizon_minutes - warmup_t
    mean_transit = transit_area / span if span > 0 else 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        by_origin = np.where(arrivals_by_origin > 0,
                             drops_by_origin / np.maximum(arrivals_by_origin, 1),
                             0.0)
    return SimReport(
        arrivals=arrivals, drops=drops,
        drop_fraction=drops / arrivals if arrivals else float("nan"),
        drop_fraction_by_origin=by_origin,
        occupancy_mean=occ / (max(arrivals, 1) * max(cfg.k_tot, 1)),
        warmup_steps=0, seed=seed,
        wall_time=time.perf_counter() - t0,
        mean_in_transit=mean_transit,
        served=served,
        mean_trip_minutes=trip_minutes / served if served else float("nan"),
    )


@dataclass
class FleetRequirement:
    k_in_transit: float
    k_pickup: float
    k_fl: int   # ceil of the sum


def fleet_requirement(net: Network, total_rate: float) -> FleetRequirement:
    """Little's-law fleet sizing: mean cars in transit plus (when pickup
    times are present) the minimum mean cars en route to pickups."""
    if net.travel_time is None:
        raise ValueError("fleet sizing requires a travel time matrix")
    k_transit = total_rate * float(np.sum(net.phi * net.travel_time[
        :net.n_demand, :net.n_supply]))
    k_pickup = 0.0
    if net.pickup_time is not None:
        lam = net.col_rates()
        mu = net.row_rates()
        support = [(i, j) for (i, j) in net.edges]
        cost = np.array([[net.pickup_time[i, j] for j in range(net.n_demand)]
                         for i in range(net.n_supply)])
        flow = solve_transportation(lam, mu, cost, support)
        k_pickup = total_rate * float(np.sum(flow * cost))
    return FleetRequirement(k_transit, k_pickup,
                            int(math.ceil(k_transit + k_pickup)))


def estimate_exponent(drop_curve):
    """Least-squares slope of -ln(drop probability) against fleet size.

    Needs at least 3 usable points; zero probabilities are censored and
    excluded with a warning.  Returns (slope, r_squared).
    """
    pts = []
    for K, p in drop_curve:
        if p <= 0.0:
            warnings.warn(f"excluding censored point K={K} with p={p}",
                          stacklevel=2)
            continue
        if p >= 1.0:
            raise ValueError("drop probabilities must lie in (0, 1)")
        pts.append((float(K), -math.log(p)))
    if len(pts) < 3:
        raise ValueError("need at least 3 usable points")
    x = np.array([k for k, _ in pts])
    y = np.array([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(r2)
