"""Closed-form die-out quantities for SIS on the complete graph:
the gambler's ruin probability, its large-tau asymptotic, the 1/x^n
approximation, and the survival function f(t)."""

import math

import numpy as np
from scipy.special import gammaln


def _log_poly_prefix(m_max, tau):
    """Running log of p_m(tau) = sum_{j=0}^m j! tau^j for m = 0..m_max.

    Terms j!*tau^j overflow doubles near j ~ 170, so both polynomials
    are evaluated in the log domain with a streaming log-sum-exp.
    """
    j = np.arange(m_max + 1, dtype=np.float64)
    log_terms = gammaln(j + 1) + j * math.log(tau)
    return np.logaddexp.accumulate(log_terms)


def gamblers_ruin_log(N, tau, n):
    """log of the ruin probability mu_n; -inf for n = N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if not 0 <= n <= N:
        raise ValueError(f"n must lie in [0,{N}]")
    if n == 0:
        return 0.0
    if n == N:
        return -math.inf
    L = _log_poly_prefix(N - 1, tau)
    return float(L[N - n - 1] - L[N - 1])


def gamblers_ruin(N, tau, n):
    """Probability that the infected-count chain on K_N started at n
    hits 0 before N: mu_n = p_{N-n-1}(tau) / p_{N-1}(tau)."""
    return math.exp(gamblers_ruin_log(N, tau, n))


def ruin_asymptotic(N, tau, n):
    """Largest-term asymptotic of mu_n with the finite-N product correction:

        mu_n ~ 1 / ( ((N-1)*tau)^n * prod_{k=1}^{n-1} (1 - k/(N-1)) )

    Valid only for tau > 1/(N-1); below that the ruin probability tends
    to 1 and the dominant-term argument fails.
    """
    if n >= N:
        raise ValueError("asymptotic requires n < N")
    if tau <= 1.0 / (N - 1):
        raise ValueError(
            f"asymptotic regime requires tau > 1/(N-1) = {1.0/(N-1):g}, got {tau}"
        )
    log_val = -n * math.log((N - 1) * tau)
    for k in range(1, n):
        log_val -= math.log1p(-k / (N - 1))
    return math.exp(log_val)


def dieout_approx(x, n):
    """Approximate metastable die-out probability 1/x^n, clamped to 1
    for x < 1 (below the mean-field threshold the process dies out with
    probability tending to 1, and 1/x > 1 is not a probability)."""
    if x <= 0:
        raise ValueError("x must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if x < 1.0:
        return 1.0
    return math.exp(-n * math.log(x))


def survival_function(x, n, lambda1, t):
    """Approximate virus survival probability

        f(t) = 1 - x^(-n) + x^(-n) * exp(-lambda1 * t)

    with f(0) = 1 and f(inf) = 1 - x^(-n).  Defined only for x >= 1;
    below threshold the expression would go negative.
    """
    if x < 1.0:
        raise ValueError(f"survival function requires x >= 1, got {x}")
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be nonnegative")
    xn = x ** (-n)
    return 1.0 - xn + xn * np.exp(-lambda1 * np.asarray(t, dtype=np.float64))
