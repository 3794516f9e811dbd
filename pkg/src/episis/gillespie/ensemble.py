"""Ensemble execution of the event-driven SIS simulator and the
estimators for prevalence, conditional prevalence, and die-out
probability, including the sample-level identity
y(t) = ytilde(t) * (1 - p0(t))."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import EventCapExceeded
from . import kernel as _default_kernel
from . import _kernel_py
from .rng import derive_seed

DEFAULT_EVENT_CAP = 10**9
Z_95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class FixedNodes:
    """Same initially infected node set in every realization."""

    nodes: tuple

    def __init__(self, nodes):
        object.__setattr__(self, "nodes", tuple(int(v) for v in nodes))


@dataclass(frozen=True)
class RandomNodes:
    """n distinct initially infected nodes drawn uniformly per realization."""

    n: int


@dataclass(frozen=True)
class Trajectory:
    """One realization: event log, grid snapshots, absorption time."""

    grid: np.ndarray
    snapshots: np.ndarray          # infected count at each grid time
    events: list                   # (time, node, new_state) transitions
    absorbed_at: float | None      # None if surviving at t_max


@dataclass(frozen=True)
class EnsembleStats:
    """Per-grid-time Monte Carlo estimates over R realizations."""

    times: np.ndarray
    R: int
    dieout: np.ndarray             # fraction of realizations with S(t)=0
    dieout_ci: np.ndarray          # 95% binomial half-width
    prevalence: np.ndarray         # y(t), mean over all realizations
    cond_prevalence: np.ndarray    # ytilde(t), mean over survivors (nan if none)
    survivors: np.ndarray = field(repr=False, default=None)


def simulate_realization(g, params, initial_set, t_max, seed,
                         grid=None, audit_every=0):
    """Run a single realization with full event logging.

    Always uses the pure-Python kernel (event logs are cheap at single-
    realization scale); the stream is identical to what the ensemble
    kernel would produce for the same seed.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if grid is None:
        grid = np.array([0.0, float(t_max)])
    grid = np.asarray(grid, dtype=np.float64)
    if grid[-1] > t_max:
        raise ValueError("grid must not extend past t_max")
    indptr, indices = g.csr
    init = np.asarray(sorted(int(v) for v in initial_set), dtype=np.int64)
    counts, absorbed, n_events, events = _kernel_py.run_realization(
        indptr, indices, g.node_count, params.beta, params.delta,
        init, 0, grid, int(seed), DEFAULT_EVENT_CAP, float(t_max),
        audit_every=audit_every, record_events=True,
    )
    if n_events < 0:
        raise EventCapExceeded(DEFAULT_EVENT_CAP)
    return Trajectory(
        grid=grid,
        snapshots=counts,
        events=events,
        absorbed_at=None if absorbed < 0 else float(absorbed),
    )


def _chunk_args(g, params, init_policy):
    indptr, indices = g.csr
    if isinstance(init_policy, FixedNodes):
        init_nodes = np.asarray(init_policy.nodes, dtype=np.int64)
        n_random = 0
        if len(init_nodes) and (init_nodes.min() < 0 or init_nodes.max() >= g.node_count):
            raise ValueError("initial node out of range")
    elif isinstance(init_policy, RandomNodes):
        if not 0 <= init_policy.n <= g.node_count:
            raise ValueError("initial count out of range")
        init_nodes = None
        n_random = init_policy.n
    else:
        raise TypeError("init_policy must be FixedNodes or RandomNodes")
    return indptr, indices, g.node_count, params.beta, params.delta, \
        init_nodes, n_random


_WORKER_STATE = {}


def _run_chunk_task(common, grid, seeds, cap, audit_every, use_python):
    impl = _kernel_py if use_python else _default_kernel.impl
    counts, absorbed, n_events, cap_hit = impl.run_chunk(
        *common, grid, seeds, cap, audit_every)
    if cap_hit >= 0:
        raise EventCapExceeded(cap)
    # reduce inside the worker: integer sums are exact, so aggregation
    # order cannot affect the result
    return (
        counts.sum(axis=0),
        (counts == 0).sum(axis=0),
        int(n_events.sum()),
    )


def run_ensemble(g, params, init_policy, R, master_seed, time_grid,
                 workers=1, event_cap=DEFAULT_EVENT_CAP, audit_every=0,
                 force_python_kernel=False):
    """Run R independent realizations and aggregate the estimators.

    Deterministic given master_seed for any worker count and either
    kernel: realization i always consumes the substream
    derive_seed(master_seed, i), and all aggregation is over exact
    integer counts.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    time_grid = np.asarray(time_grid, dtype=np.float64)
    if time_grid[0] != 0.0 or np.any(np.diff(time_grid) <= 0):
        raise ValueError("time grid must start at 0 and increase strictly")
    common = _chunk_args(g, params, init_policy)
    seeds = np.array(
        [derive_seed(master_seed, i) for i in range(R)], dtype=np.uint64)
    # runaway guard: each realization gets an equal slice of the budget,
    # floored so that modest ensembles are never starved
    per_real_cap = max(10**6, event_cap // R)

    chunk = max(1, math.ceil(R / (workers * 4))) if workers > 1 else R
    tasks = [
        (common, time_grid, seeds[lo:lo + chunk], per_real_cap, audit_every,
         force_python_kernel)
        for lo in range(0, R, chunk)
    ]
    if workers <= 1:
        results = [_run_chunk_task(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk_star, tasks))

    G = len(time_grid)
    sum_counts = np.zeros(G, dtype=np.int64)
    dead = np.zeros(G, dtype=np.int64)
    for sc, dd, _ in results:
        sum_counts += sc
        dead += dd
    survivors = R - dead
    p0 = dead / R
    prevalence = sum_counts / (R * g.node_count)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(
            survivors > 0, sum_counts / (survivors * g.node_count), np.nan)
    ci = Z_95 * np.sqrt(p0 * (1.0 - p0) / R)
    return EnsembleStats(
        times=time_grid, R=R, dieout=p0, dieout_ci=ci,
        prevalence=prevalence, cond_prevalence=cond, survivors=survivors,
    )


def _run_chunk_star(args):
    return _run_chunk_task(*args)


def dieout_at(stats, t):
    """(estimate, 95% half-width) at an exact grid time; no interpolation."""
    hits = np.nonzero(np.abs(stats.times - t) < 1e-12)[0]
    if len(hits) == 0:
        raise ValueError(f"t={t} is not on the ensemble grid")
    i = hits[0]
    return float(stats.dieout[i]), float(stats.dieout_ci[i])


def ensemble_to_csv(stats, path):
    data = np.column_stack((
        stats.times,
        np.full(len(stats.times), stats.R, dtype=float),
        stats.dieout, stats.dieout_ci,
        stats.prevalence, stats.cond_prevalence,
    ))
    np.savetxt(path, data, delimiter=",", comments="", fmt="%.17g",
               header="t,R,dieout,dieout_ci,prevalence,cond_prevalence")
