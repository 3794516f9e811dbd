"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, numeric failures
(non-convergence, conservation breaches) exit 2, capacity limits exit 3.
"""


class EpisisError(Exception):
    """Base class for all package errors."""


class NumericError(EpisisError):
    """Numerical failure: non-convergence or conservation breach."""


class ConservationError(NumericError):
    """Probability mass not conserved to the required tolerance."""

    def __init__(self, deviation, step):
        self.deviation = deviation
        self.step = step
        super().__init__(
            f"probability conservation violated by {deviation:.3e} "
            f"with step h={step:g}; retry with a smaller step"
        )


class NonConvergenceError(NumericError):
    """Iteration cap reached before the convergence criterion was met."""

    def __init__(self, message, last_iterate=None, residual=None):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(message)


class CapacityError(EpisisError):
    """Problem size or event budget exceeds a configured hard cap."""


class EventCapExceeded(CapacityError):
    """A simulation realization exceeded its event budget."""

    def __init__(self, cap, realization=None):
        self.cap = cap
        self.realization = realization
        where = f" (realization {realization})" if realization is not None else ""
        super().__init__(f"event cap of {cap} events exceeded{where}")


class ConfigError(EpisisError):
    """Invalid experiment configuration or CLI arguments."""


class EdgeListParseError(EpisisError):
    """Malformed edge-list file."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")
