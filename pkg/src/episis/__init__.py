"""SIS die-out probability toolkit.

Computes and cross-validates the die-out probability of Markovian SIS
epidemics on networks via four independent routes: exact birth-and-death
chain integration on complete graphs, the gambler's-ruin closed form,
the 1/x^n approximation, and Gillespie-style Monte Carlo; also provides
the N-intertwined mean-field approximation and its die-out-corrected
prevalence.
"""

__version__ = "0.1.0"

from .graph import (Graph, SpectralRadius, complete_graph, er_graph,
                    load_edge_list, powerlaw_graph, save_edge_list,
                    spectral_radius, star_graph)
from .params import EpidemicParams
from .chain import (BirthDeathGenerator, ChainSolution, build_generator,
                    chain_to_csv, dieout_trace, full_state_solver,
                    prevalence_trace, solve_transient)
from .ruin import (dieout_approx, gamblers_ruin, gamblers_ruin_log,
                   ruin_asymptotic, survival_function)
from .nimfa import (NimfaSolution, corrected_prevalence, nimfa_steady_state,
                    nimfa_to_csv, solve_nimfa)
from .gillespie import (EnsembleStats, FixedNodes, RandomNodes, Trajectory,
                        dieout_at, ensemble_to_csv, run_ensemble,
                        simulate_realization)
