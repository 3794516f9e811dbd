"""Exact transient solution of SIS on the complete graph as an
(N+1)-state birth-and-death chain, plus a brute-force full-state-space
solver for tiny arbitrary graphs.

On K_N the number of infected nodes is a birth-and-death process with
birth rate beta*i*(N-i) (number of S-I links times the per-link rate)
and death rate delta*i; state 0 is absorbing.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import CapacityError, ConservationError

DEFAULT_STEP = 0.01
CONSERVATION_TOL = 1e-8
CLAMP_TOL = 1e-12
FULL_STATE_MAX_N = 13


@dataclass(frozen=True)
class BirthDeathGenerator:
    """Tridiagonal generator of the infected-count chain on K_N."""

    N: int
    birth: np.ndarray  # birth[i] = beta*i*(N-i), rate i -> i+1
    death: np.ndarray  # death[i] = delta*i,      rate i -> i-1

    @property
    def size(self):
        return self.N + 1


@dataclass(frozen=True)
class ChainSolution:
    """State probabilities s_i(t) = Pr[S(t) = i/N] on a time grid."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), N+1)

    @property
    def N(self):
        return self.states.shape[1] - 1


def build_generator(N, params):
    if N < 1:
        raise ValueError("N must be >= 1")
    i = np.arange(N + 1, dtype=np.float64)
    birth = params.beta * i * (N - i)
    death = params.delta * i
    return BirthDeathGenerator(N=N, birth=birth, death=death)


def _rhs(gen, s):
    # ds_i/dt = b_{i-1} s_{i-1} + d_{i+1} s_{i+1} - (b_i + d_i) s_i
    ds = -(gen.birth + gen.death) * s
    ds[1:] += gen.birth[:-1] * s[:-1]
    ds[:-1] += gen.death[1:] * s[1:]
    return ds


def solve_transient(gen, n_init, times, h=None):
    """Integrate s'(t) = s(t) Q by classical RK4 with fixed step h.

    The default step is 0.01 capped at 1/max(exit rate), which keeps
    the explicit integrator inside its stability region for stiff
    configurations.  The integrator lands exactly on every requested
    grid time by clipping the final substep of each interval.
    Probability conservation is enforced to 1e-8 at every output time;
    tiny negative entries from roundoff (|v| < 1e-12) are clamped to
    zero, larger ones are an error.
    """
    if h is None:
        max_rate = float(np.max(gen.birth + gen.death))
        h = min(DEFAULT_STEP, 1.0 / max_rate) if max_rate > 0 else DEFAULT_STEP
    times = np.asarray(times, dtype=np.float64)
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    if not 0 <= n_init <= gen.N:
        raise ValueError(f"n_init must lie in [0,{gen.N}]")

    s = np.zeros(gen.size)
    s[n_init] = 1.0
    out = np.empty((len(times), gen.size))
    out[0] = s
    t = 0.0
    # divergence shows up as inf/nan and is raised by _validated, so
    # the intermediate overflow warnings are just noise
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, len(times)):
            target = times[k]
            while t < target - 1e-15:
                step = min(h, target - t)
                k1 = _rhs(gen, s)
                k2 = _rhs(gen, s + 0.5 * step * k1)
                k3 = _rhs(gen, s + 0.5 * step * k2)
                k4 = _rhs(gen, s + step * k3)
                s = s + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                t += step
            t = target
            out[k] = _validated(s, h)
    return ChainSolution(times=times, states=out)


def _validated(s, h):
    s = s.copy()
    if not np.all(np.isfinite(s)):
        raise ConservationError(np.inf, h)
    neg = s < 0
    if np.any(s[neg] < -CLAMP_TOL):
        raise ConservationError(float(-s.min()), h)
    s[neg] = 0.0
    total = s.sum()
    if abs(total - 1.0) > CONSERVATION_TOL:
        raise ConservationError(abs(total - 1.0), h)
    return s / total


def prevalence_trace(sol):
    """Expected infected fraction y(t) = sum_i (i/N) s_i(t)."""
    frac = np.arange(sol.N + 1) / sol.N
    return sol.states @ frac


def dieout_trace(sol):
    """Absorption probability s_0(t) = Pr[S(t)=0]."""
    return sol.states[:, 0].copy()


def chain_to_csv(sol, path):
    header = "t," + ",".join(f"s_{i}" for i in range(sol.N + 1))
    data = np.column_stack((sol.times, sol.states))
    np.savetxt(path, data, delimiter=",", header=header, comments="",
               fmt="%.17g")


def full_state_solver(g, params, initial_set, times):
    """Exact SIS transient on an arbitrary graph via the 2^N-state chain.

    Returns (dieout, prevalence) series on the grid; hard-capped at
    N <= 13 (8192 states).  Serves as the brute-force oracle for
    everything else in the package.
    """
    N = g.node_count
    if N > FULL_STATE_MAX_N:
        raise CapacityError(
            f"full-state solver is capped at N={FULL_STATE_MAX_N} "
            f"(2^N states); got N={N}"
        )
    times = np.asarray(times, dtype=np.float64)
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    initial_set = set(int(v) for v in initial_set)
    if any(not 0 <= v < N for v in initial_set):
        raise ValueError("initial node out of range")

    n_states = 1 << N
    nbr_masks = np.zeros(N, dtype=np.int64)
    for u in range(N):
        for v in g.neighbors(u):
            nbr_masks[u] |= 1 << int(v)

    rows, cols, vals = [], [], []
    diag = np.zeros(n_states)
    for state in range(n_states):
        for j in range(N):
            bit = 1 << j
            if state & bit:  # infected node j cures
                rate = params.delta
                rows.append(state)
                cols.append(state ^ bit)
                vals.append(rate)
                diag[state] -= rate
            else:  # susceptible node j gets infected
                k = bin(state & nbr_masks[j]).count("1")
                if k:
                    rate = params.beta * k
                    rows.append(state)
                    cols.append(state | bit)
                    vals.append(rate)
                    diag[state] -= rate
    rows.extend(range(n_states))
    cols.extend(range(n_states))
    vals.extend(diag)
    Q = sp.csr_matrix((vals, (rows, cols)), shape=(n_states, n_states))

    s0 = np.zeros(n_states)
    init_state = 0
    for v in initial_set:
        init_state |= 1 << v
    s0[init_state] = 1.0

    popcount = np.array([bin(s).count("1") for s in range(n_states)])
    QT = Q.T.tocsc()
    dieout = np.empty(len(times))
    prevalence = np.empty(len(times))
    s = s0
    prev_t = times[0]
    for k, t in enumerate(times):
        if k > 0:
            s = expm_multiply(QT * (t - prev_t), s)
            prev_t = t
        total = s.sum()
        if abs(total - 1.0) > CONSERVATION_TOL:
            raise ConservationError(abs(total - 1.0), t)
        dieout[k] = s[0]
        prevalence[k] = (popcount @ s) / N
    return dieout, prevalence
