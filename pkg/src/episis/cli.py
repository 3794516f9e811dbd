"""episis command-line front end.

Exit codes: 0 success, 1 usage/config error, 2 numeric failure,
3 capacity limit.
"""

import argparse
import sys

import numpy as np

from . import __version__, chain, nimfa, ruin
from .errors import CapacityError, ConfigError, EpisisError, NumericError
from .experiment import load_config, parse_grid, run_experiment
from .gillespie import (FixedNodes, RandomNodes, dieout_at, ensemble_to_csv,
                        run_ensemble)
from .graph import complete_graph, er_graph, load_edge_list, powerlaw_graph, \
    spectral_radius
from .params import EpidemicParams


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def parse_graph_spec(spec):
    """'complete:N' | 'er:N:p:seed' | 'powerlaw:N:exponent:seed' | path."""
    parts = spec.split(":")
    try:
        if parts[0] == "complete" and len(parts) == 2:
            return complete_graph(int(parts[1]))
        if parts[0] == "er" and len(parts) == 4:
            return er_graph(int(parts[1]), float(parts[2]), int(parts[3]))
        if parts[0] == "powerlaw" and len(parts) == 4:
            return powerlaw_graph(int(parts[1]), float(parts[2]), int(parts[3]))
    except ValueError as exc:
        raise ConfigError(f"bad graph spec {spec!r}: {exc}") from exc
    if len(parts) == 1:
        return load_edge_list(spec)
    raise ConfigError(f"bad graph spec {spec!r}")


def _resolve_tau(args, g=None):
    """tau from --tau, or from --x via the spectral radius."""
    if (args.tau is None) == (getattr(args, "x", None) is None):
        raise ConfigError("give exactly one of --tau and --x")
    if args.tau is not None:
        return args.tau
    if g is None:
        raise ConfigError("--x requires a graph to take the spectral radius of")
    return args.x / spectral_radius(g).value


def cmd_formula(args):
    print(f"{ruin.dieout_approx(args.x, args.n):.6g}")


def cmd_ruin(args):
    if args.asymptotic:
        print(f"{ruin.ruin_asymptotic(args.N, args.tau, args.n):.12g}")
    else:
        print(f"{ruin.gamblers_ruin(args.N, args.tau, args.n):.12g}")


def cmd_chain(args):
    grid = parse_grid(args.grid)
    params = EpidemicParams.from_tau(args.tau)
    gen = chain.build_generator(args.N, params)
    sol = chain.solve_transient(gen, args.n, grid, h=args.step)
    if args.out:
        chain.chain_to_csv(sol, args.out)
        print(f"wrote {args.out}")
    else:
        s0 = chain.dieout_trace(sol)
        y = chain.prevalence_trace(sol)
        t = sol.times[-1]
        print(f"s0({t:g}) = {s0[-1]:.6f}")
        print(f"y({t:g}) = {y[-1]:.6f}")


def cmd_simulate(args):
    g = parse_graph_spec(args.graph)
    tau = _resolve_tau(args, g)
    params = EpidemicParams.from_tau(tau)
    grid = parse_grid(args.grid) if args.grid else \
        np.linspace(0.0, args.t_max, 101)
    policy = RandomNodes(args.n) if args.init == "random" \
        else FixedNodes(range(args.n))
    stats = run_ensemble(g, params, policy, args.realizations, args.seed,
                         grid, workers=args.workers, event_cap=args.event_cap)
    t_s = args.sample_time if args.sample_time is not None else grid[-1]
    est, ci = dieout_at(stats, t_s)
    print(f"dieout({t_s:g}) = {est:.6f} +/- {ci:.6f}")
    if args.out:
        ensemble_to_csv(stats, args.out)
        print(f"wrote {args.out}")


def cmd_nimfa(args):
    g = parse_graph_spec(args.graph)
    lam1 = spectral_radius(g).value
    tau = _resolve_tau(args, g)
    x = tau * lam1
    if abs(x - 1.0) < 1e-3:
        print("warning: x is within 1e-3 of threshold; convergence is slow",
              file=sys.stderr)
    params = EpidemicParams.from_tau(tau)
    grid = parse_grid(args.grid)
    v0 = np.full(g.node_count, args.n / g.node_count)
    sol = nimfa.solve_nimfa(g, params, v0, grid)
    if args.out:
        nimfa.nimfa_to_csv(sol, max(x, 1.0), args.n, lam1, args.out,
                           per_node=args.per_node)
        print(f"wrote {args.out}")
    else:
        y1 = sol.prevalence
        print(f"y1({grid[-1]:g}) = {y1[-1]:.6f}")


def cmd_experiment(args):
    cfg = load_config(args.config)
    run_experiment(cfg, out_dir=args.out, scale=args.scale,
                   workers=args.workers)
    out = args.out if args.out is not None else cfg.out
    print(f"wrote results under {out}")


def build_parser():
    p = _Parser(prog="episis",
                description="SIS die-out probability toolkit: exact chain, "
                            "gambler's ruin, 1/x^n formula, Gillespie "
                            "simulation, and NIMFA")
    p.add_argument("--version", action="version", version=f"episis {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("formula", help="die-out approximation 1/x^n")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_formula)

    sp = sub.add_parser("ruin", help="gambler's ruin probability on K_N")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--asymptotic", action="store_true",
                    help="large-N closed form instead of the exact sum")
    sp.set_defaults(func=cmd_ruin)

    sp = sub.add_parser("chain", help="exact birth-death chain on K_N")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--n", type=int, default=1, help="initially infected")
    sp.add_argument("--grid", required=True, help="start:step:stop")
    sp.add_argument("--step", type=float, default=chain.DEFAULT_STEP,
                    help="RK4 step size")
    sp.add_argument("--out", help="write CSV here instead of printing")
    sp.set_defaults(func=cmd_chain)

    sp = sub.add_parser("simulate", help="Gillespie ensemble on any graph")
    sp.add_argument("--graph", required=True,
                    help="complete:N | er:N:p:seed | powerlaw:N:exp:seed | path")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--x", type=float)
    sp.add_argument("--realizations", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--t-max", type=float, default=30.0)
    sp.add_argument("--grid", help="start:step:stop (default 101 points)")
    sp.add_argument("--sample-time", type=float)
    sp.add_argument("--init", choices=("fixed", "random"), default="random")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--event-cap", type=int, default=10**9,
                    help="total event budget across the ensemble")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("nimfa", help="mean-field prevalence with die-out correction")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--x", type=float)
    sp.add_argument("--grid", required=True)
    sp.add_argument("--per-node", action="store_true",
                    help="include per-node columns in the CSV")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_nimfa)

    sp = sub.add_parser("experiment", help="run a preset or config file")
    sp.add_argument("config", help="preset name (fig1a..fig4b) or path")
    sp.add_argument("--out", help="output directory (default from config)")
    sp.add_argument("--scale", type=int, default=1,
                    help="divide realization counts by this factor")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"episis: error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"episis: numeric failure: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"episis: capacity limit: {exc}", file=sys.stderr)
        return 3
    except EpisisError as exc:
        print(f"episis: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
