"""Pure-Python event loop, the fallback when the compiled extension is
unavailable.  Every random draw and floating-point operation mirrors
``_kernel.pyx`` exactly, so both kernels produce identical trajectories
from the same seed."""

from math import log

import numpy as np

from .rng import GOLDEN, MASK64, mix64

COMPILED = False


def _fen_add(tree, size, i, delta):
    i += 1
    while i <= size:
        tree[i] += delta
        i += i & (-i)


def _fen_sample(tree, size, top_bit, r):
    # smallest node index whose prefix sum exceeds r
    idx = 0
    bit = top_bit
    while bit:
        nxt = idx + bit
        if nxt <= size and tree[nxt] <= r:
            idx = nxt
            r -= tree[nxt]
        bit >>= 1
    return idx


def run_realization(indptr, indices, N, beta, delta, init_nodes, n_random,
                    grid, seed, event_cap, t_end, audit_every=0,
                    record_events=False):
    """Simulate one SIS realization; returns
    (counts_per_grid, absorbed_at, n_events, event_log).

    counts_per_grid[k] is the infected count at grid[k]; absorbed_at is
    -1.0 if the process survives past t_end.  event_log is a list of
    (time, node, new_state) or None when not requested.
    """
    indptr = list(map(int, indptr))
    indices = list(map(int, indices))
    grid = [float(t) for t in grid]
    G = len(grid)

    status = [0] * N          # 0 susceptible, 1 infected
    inf_nbrs = [0] * N        # infected-neighbor count, all nodes
    infected = [0] * N        # dense list of infected nodes
    pos = [0] * N             # index of each infected node in `infected`
    tree = [0] * (N + 1)      # Fenwick over inf_nbrs of susceptible nodes
    top_bit = 1
    while (top_bit << 1) <= N:
        top_bit <<= 1

    state = seed & MASK64
    n_inf = 0
    total_w = 0               # number of S-I links

    def infect(v):
        nonlocal n_inf, total_w
        status[v] = 1
        infected[n_inf] = v
        pos[v] = n_inf
        n_inf += 1
        w = inf_nbrs[v]
        if w:
            _fen_add(tree, N, v, -w)
            total_w -= w
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            inf_nbrs[u] += 1
            if status[u] == 0:
                _fen_add(tree, N, u, 1)
                total_w += 1

    def cure(v):
        nonlocal n_inf, total_w
        status[v] = 0
        last = infected[n_inf - 1]
        idx = pos[v]
        infected[idx] = last
        pos[last] = idx
        n_inf -= 1
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            inf_nbrs[u] -= 1
            if status[u] == 0:
                _fen_add(tree, N, u, -1)
                total_w -= 1
        w = inf_nbrs[v]
        if w:
            _fen_add(tree, N, v, w)
            total_w += w

    if init_nodes is not None:
        for v in init_nodes:
            infect(int(v))
    else:
        for _ in range(n_random):
            while True:
                state = (state + GOLDEN) & MASK64
                u = (mix64(state) >> 11) * 1.1102230246251565e-16
                v = int(u * N)
                if status[v] == 0:
                    infect(v)
                    break

    counts = np.zeros(G, dtype=np.int64)
    events = [] if record_events else None
    t = 0.0
    gi = 0
    n_events = 0
    absorbed = -1.0
    while True:
        if n_inf == 0:
            absorbed = t
            while gi < G:
                counts[gi] = 0
                gi += 1
            break
        rate_cure = delta * n_inf
        total = rate_cure + beta * total_w
        state = (state + GOLDEN) & MASK64
        u = (mix64(state) >> 11) * 1.1102230246251565e-16
        tn = t + (-log(1.0 - u) / total)
        while gi < G and grid[gi] < tn:
            counts[gi] = n_inf
            gi += 1
        if tn > t_end:
            break
        state = (state + GOLDEN) & MASK64
        u2 = (mix64(state) >> 11) * 1.1102230246251565e-16
        state = (state + GOLDEN) & MASK64
        u3 = (mix64(state) >> 11) * 1.1102230246251565e-16
        if u2 * total < rate_cure:
            v = infected[int(u3 * n_inf)]
            cure(v)
            new_state = 0
        else:
            v = _fen_sample(tree, N, top_bit, u3 * total_w)
            infect(v)
            new_state = 1
        t = tn
        n_events += 1
        if record_events:
            events.append((t, v, new_state))
        if n_events >= event_cap:
            return counts, absorbed, -n_events, events
        if audit_every and n_events % audit_every == 0:
            recount = sum(
                inf_nbrs[v] for v in range(N) if status[v] == 0
            )
            if recount != total_w:
                raise RuntimeError(
                    f"S-I edge bookkeeping drifted: {total_w} != {recount}"
                )
    return counts, absorbed, n_events, events


def run_chunk(indptr, indices, N, beta, delta, init_nodes, n_random,
              grid, seeds, event_cap, audit_every=0):
    """Simulate len(seeds) realizations; returns (counts matrix,
    absorbed times, events per realization, cap_hit index or -1)."""
    R = len(seeds)
    G = len(grid)
    counts = np.zeros((R, G), dtype=np.int64)
    absorbed = np.empty(R, dtype=np.float64)
    n_events = np.zeros(R, dtype=np.int64)
    t_end = float(grid[-1])
    for r in range(R):
        c, a, ne, _ = run_realization(
            indptr, indices, N, beta, delta, init_nodes, n_random,
            grid, int(seeds[r]), event_cap, t_end, audit_every=audit_every,
        )
        if ne < 0:
            return counts, absorbed, n_events, r
        counts[r] = c
        absorbed[r] = a
        n_events[r] = ne
    return counts, absorbed, n_events, -1
