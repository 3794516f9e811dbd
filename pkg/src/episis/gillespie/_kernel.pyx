# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event loop for the SIS simulator.

Bit-for-bit equivalent to ``_kernel_py``: same splitmix64 stream, same
draw order, same IEEE arithmetic, so trajectories are identical between
the two kernels for any seed.
"""

import numpy as np

from libc.math cimport log

COMPILED = True

ctypedef unsigned long long u64

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t sm64_mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    u64 sm64_mix(u64 z) nogil

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.1102230246251565e-16  # 2**-53


cdef inline double next_double(u64 *state) nogil:
    state[0] = state[0] + GOLDEN
    return <double>(sm64_mix(state[0]) >> 11) * INV53


cdef inline void fen_add(long long *tree, Py_ssize_t size,
                         Py_ssize_t i, long long delta) nogil:
    i += 1
    while i <= size:
        tree[i] += delta
        i += i & (-i)


cdef inline Py_ssize_t fen_sample(long long *tree, Py_ssize_t size,
                                  Py_ssize_t top_bit, double r) nogil:
    cdef Py_ssize_t idx = 0, bit = top_bit, nxt
    while bit:
        nxt = idx + bit
        if nxt <= size and <double>tree[nxt] <= r:
            idx = nxt
            r -= <double>tree[nxt]
        bit >>= 1
    return idx


cdef struct SimState:
    Py_ssize_t n_inf
    long long total_w


cdef inline void infect(Py_ssize_t v, long long[::1] indptr,
                        long long[::1] indices, signed char *status,
                        long long *inf_nbrs, long long *infected,
                        long long *pos, long long *tree, Py_ssize_t N,
                        SimState *st) nogil:
    cdef Py_ssize_t k, u
    cdef long long w
    status[v] = 1
    infected[st.n_inf] = v
    pos[v] = st.n_inf
    st.n_inf += 1
    w = inf_nbrs[v]
    if w:
        fen_add(tree, N, v, -w)
        st.total_w -= w
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        inf_nbrs[u] += 1
        if status[u] == 0:
            fen_add(tree, N, u, 1)
            st.total_w += 1


cdef inline void cure(Py_ssize_t v, long long[::1] indptr,
                      long long[::1] indices, signed char *status,
                      long long *inf_nbrs, long long *infected,
                      long long *pos, long long *tree, Py_ssize_t N,
                      SimState *st) nogil:
    cdef Py_ssize_t k, u, idx
    cdef long long w, last
    status[v] = 0
    last = infected[st.n_inf - 1]
    idx = pos[v]
    infected[idx] = last
    pos[last] = idx
    st.n_inf -= 1
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        inf_nbrs[u] -= 1
        if status[u] == 0:
            fen_add(tree, N, u, -1)
            st.total_w -= 1
    w = inf_nbrs[v]
    if w:
        fen_add(tree, N, v, w)
        st.total_w += w


def run_chunk(indptr_in, indices_in, Py_ssize_t N, double beta, double delta,
              init_nodes, Py_ssize_t n_random, grid_in, seeds_in,
              long long event_cap, long long audit_every=0):
    """Simulate len(seeds) realizations; returns (counts matrix,
    absorbed times, events per realization, cap_hit index or -1)."""
    cdef long long[::1] indptr = np.ascontiguousarray(indptr_in, dtype=np.int64)
    cdef long long[::1] indices = np.ascontiguousarray(indices_in, dtype=np.int64)
    cdef double[::1] grid = np.ascontiguousarray(grid_in, dtype=np.float64)
    cdef u64[::1] seeds = np.ascontiguousarray(seeds_in, dtype=np.uint64)
    cdef long long[::1] init
    cdef Py_ssize_t n_init = 0
    if init_nodes is not None:
        init = np.ascontiguousarray(init_nodes, dtype=np.int64)
        n_init = init.shape[0]
    else:
        init = np.empty(0, dtype=np.int64)

    cdef Py_ssize_t R = seeds.shape[0]
    cdef Py_ssize_t G = grid.shape[0]
    counts_arr = np.zeros((R, G), dtype=np.int64)
    absorbed_arr = np.empty(R, dtype=np.float64)
    events_arr = np.zeros(R, dtype=np.int64)
    cdef long long[:, ::1] counts = counts_arr
    cdef double[::1] absorbed = absorbed_arr
    cdef long long[::1] n_events_out = events_arr

    status_arr = np.zeros(N, dtype=np.int8)
    inf_nbrs_arr = np.zeros(N, dtype=np.int64)
    infected_arr = np.zeros(N, dtype=np.int64)
    pos_arr = np.zeros(N, dtype=np.int64)
    tree_arr = np.zeros(N + 1, dtype=np.int64)
    cdef signed char[::1] status = status_arr
    cdef long long[::1] inf_nbrs = inf_nbrs_arr
    cdef long long[::1] infected = infected_arr
    cdef long long[::1] pos = pos_arr
    cdef long long[::1] tree = tree_arr

    cdef Py_ssize_t top_bit = 1
    while (top_bit << 1) <= N:
        top_bit <<= 1
    cdef double t_end = grid[G - 1]

    cdef SimState st
    cdef u64 state
    cdef Py_ssize_t r, gi, v, i, j
    cdef long long n_events, recount
    cdef double t, tn, u, u2, u3, rate_cure, total
    cdef Py_ssize_t cap_hit = -1

    with nogil:
        for r in range(R):
            # reset per-realization state
            for i in range(N):
                status[i] = 0
                inf_nbrs[i] = 0
            for i in range(N + 1):
                tree[i] = 0
            st.n_inf = 0
            st.total_w = 0
            state = seeds[r]

            if n_init > 0:
                for i in range(n_init):
                    infect(init[i], indptr, indices, &status[0], &inf_nbrs[0],
                           &infected[0], &pos[0], &tree[0], N, &st)
            else:
                for i in range(n_random):
                    while True:
                        u = next_double(&state)
                        v = <Py_ssize_t>(u * N)
                        if status[v] == 0:
                            infect(v, indptr, indices, &status[0],
                                   &inf_nbrs[0], &infected[0], &pos[0],
                                   &tree[0], N, &st)
                            break

            t = 0.0
            gi = 0
            n_events = 0
            absorbed[r] = -1.0
            while True:
                if st.n_inf == 0:
                    absorbed[r] = t
                    while gi < G:
                        counts[r, gi] = 0
                        gi += 1
                    break
                rate_cure = delta * st.n_inf
                total = rate_cure + beta * st.total_w
                u = next_double(&state)
                tn = t + (-log(1.0 - u) / total)
                while gi < G and grid[gi] < tn:
                    counts[r, gi] = st.n_inf
                    gi += 1
                if tn > t_end:
                    break
                u2 = next_double(&state)
                u3 = next_double(&state)
                if u2 * total < rate_cure:
                    v = infected[<Py_ssize_t>(u3 * st.n_inf)]
                    cure(v, indptr, indices, &status[0], &inf_nbrs[0],
                         &infected[0], &pos[0], &tree[0], N, &st)
                else:
                    v = fen_sample(&tree[0], N, top_bit, u3 * st.total_w)
                    infect(v, indptr, indices, &status[0], &inf_nbrs[0],
                           &infected[0], &pos[0], &tree[0], N, &st)
                t = tn
                n_events += 1
                if n_events >= event_cap:
                    cap_hit = r
                    break
                if audit_every and n_events % audit_every == 0:
                    recount = 0
                    for i in range(N):
                        if status[i] == 0:
                            recount += inf_nbrs[i]
                    if recount != st.total_w:
                        cap_hit = -2 - r  # bookkeeping failure marker
                        break
            n_events_out[r] = n_events
            if cap_hit != -1:
                break

    if cap_hit <= -2:
        raise RuntimeError(
            f"S-I edge bookkeeping drifted in realization {-2 - cap_hit}"
        )
    return counts_arr, absorbed_arr, events_arr, cap_hit
