"""N-intertwined mean-field approximation (one ODE per node), its
prevalence, steady state, and the die-out-corrected prevalence."""

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, NumericError
from .ruin import survival_function

DEFAULT_STEP = 0.01
BOUNDS_SLACK = 1e-12
NEAR_THRESHOLD_BAND = 1e-3


@dataclass(frozen=True)
class NimfaSolution:
    """Per-node infection probabilities v_j(t) on a time grid."""

    times: np.ndarray
    v: np.ndarray  # shape (len(times), N)

    @property
    def prevalence(self):
        """Mean-field prevalence y1(t) = (1/N) sum_j v_j(t)."""
        return self.v.mean(axis=1)


def _rhs(A, beta, delta, v):
    # dv_j/dt = -delta v_j + beta (1 - v_j) * sum_k a_kj v_k
    Av = A @ v
    return -delta * v + beta * (1.0 - v) * Av


def solve_nimfa(g, params, v0, times, h=None):
    """Integrate the mean-field system by fixed-step RK4.

    The default step is 0.01 capped at 1/max(per-node exit rate) to
    stay inside the explicit integrator's stability region.  v0 entries
    must lie in [0,1]; the dynamics preserve the interval, so any
    iterate escaping [0,1] beyond roundoff slack means the step is too
    large.
    """
    if h is None:
        max_rate = params.delta + params.beta * float(g.degrees.max(initial=0))
        h = min(DEFAULT_STEP, 1.0 / max_rate)
    times = np.asarray(times, dtype=np.float64)
    v = np.asarray(v0, dtype=np.float64).copy()
    if v.shape != (g.node_count,):
        raise ValueError(f"v0 must have length {g.node_count}")
    if np.any(v < 0) or np.any(v > 1):
        raise ValueError("v0 entries must lie in [0,1]")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    A = g.adjacency()
    beta, delta = params.beta, params.delta

    out = np.empty((len(times), g.node_count))
    out[0] = v
    t = times[0]
    # divergence surfaces as inf/nan and is raised below, so the
    # intermediate overflow warnings are just noise
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, len(times)):
            target = times[k]
            while t < target - 1e-15:
                step = min(h, target - t)
                k1 = _rhs(A, beta, delta, v)
                k2 = _rhs(A, beta, delta, v + 0.5 * step * k1)
                k3 = _rhs(A, beta, delta, v + 0.5 * step * k2)
                k4 = _rhs(A, beta, delta, v + step * k3)
                v = v + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                t += step
            t = target
            if (not np.all(np.isfinite(v)) or np.any(v < -BOUNDS_SLACK)
                    or np.any(v > 1.0 + BOUNDS_SLACK)):
                raise NumericError(
                    f"mean-field iterate left [0,1] at t={t:g} "
                    f"(step h={h:g} too large; retry with a smaller step)"
                )
            v = np.clip(v, 0.0, 1.0)
            out[k] = v
    return NimfaSolution(times=times, v=out)


def nimfa_steady_state(g, params, tol=1e-10, max_iter=100_000, damping=0.5):
    """Nonzero fixed point of the mean-field system for x > 1, zero below.

    Uses the damped iteration v <- (1-w) v + w G(v) with
    G(v)_j = beta (Av)_j / (delta + beta (Av)_j), started from
    (1 - 1/x) * ones.  Convergence is slow near x = 1; callers should
    warn when |x - 1| < 1e-3.
    """
    from .graph import spectral_radius

    lam1 = spectral_radius(g).value
    x = params.tau * lam1
    if x <= 1.0:
        return np.zeros(g.node_count)
    A = g.adjacency()
    beta, delta = params.beta, params.delta
    v = np.full(g.node_count, 1.0 - 1.0 / x)
    for _ in range(max_iter):
        Av = A @ v
        g_v = beta * Av / (delta + beta * Av)
        v_next = (1.0 - damping) * v + damping * g_v
        resid = float(np.max(np.abs(_rhs(A, beta, delta, v_next))))
        v = v_next
        if resid <= tol:
            return v
    raise NonConvergenceError(
        f"steady-state iteration stalled at residual {resid:.3e} "
        f"(tol {tol:g}, x={x:g})",
        last_iterate=v,
        residual=resid,
    )


def corrected_prevalence(sol, x, n, lambda1):
    """Die-out-corrected prevalence y1(t) * f(t)."""
    f = survival_function(x, n, lambda1, sol.times)
    return sol.prevalence * f


def nimfa_to_csv(sol, x, n, lambda1, path, per_node=False):
    y1 = sol.prevalence
    f = survival_function(x, n, lambda1, sol.times)
    cols = [sol.times, y1, f, y1 * f]
    header = "t,y1,f,y_corrected"
    if per_node:
        cols.extend(sol.v.T)
        header += "," + ",".join(f"v_{j}" for j in range(sol.v.shape[1]))
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=header,
               comments="", fmt="%.17g")
