from .ensemble import (
    EnsembleStats,
    FixedNodes,
    RandomNodes,
    Trajectory,
    dieout_at,
    ensemble_to_csv,
    run_ensemble,
    simulate_realization,
)
from .kernel import COMPILED

__all__ = [
    "COMPILED",
    "EnsembleStats",
    "FixedNodes",
    "RandomNodes",
    "Trajectory",
    "dieout_at",
    "ensemble_to_csv",
    "run_ensemble",
    "simulate_realization",
]
