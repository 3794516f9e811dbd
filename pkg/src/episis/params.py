"""Epidemic rate parameters."""

from dataclasses import dataclass


@dataclass(frozen=True)
class EpidemicParams:
    """Infection rate per S-I link and curing rate per infected node.

    The effective infection rate tau = beta/delta is the single
    dimensionless spreading parameter; all experiments in this package
    follow the convention delta = 1 unless stated otherwise.
    """

    beta: float
    delta: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @property
    def tau(self) -> float:
        return self.beta / self.delta

    @classmethod
    def from_tau(cls, tau, delta=1.0):
        return cls(beta=tau * delta, delta=delta)

    @classmethod
    def from_x(cls, x, lambda1, delta=1.0):
        """Construct from the normalized rate x = tau * lambda1."""
        return cls.from_tau(x / lambda1, delta=delta)
