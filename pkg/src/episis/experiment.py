"""Experiment configs and the multi-method figure-reproduction runner.

A config is a flat INI file with one section per concern; the checked-in
presets (``fig1a`` .. ``fig4b``) run the standard figure pipelines at
desk scale.  Each requested method writes its own CSV and a combined
``summary.csv`` holds one row per (x, n) cell.
"""

import configparser
import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import chain, nimfa, ruin
from .errors import ConfigError
from .gillespie import FixedNodes, RandomNodes, dieout_at, run_ensemble
from .graph import (complete_graph, er_graph, load_edge_list,
                    powerlaw_graph, spectral_radius)
from .params import EpidemicParams

VALID_METHODS = ("chain", "ruin", "formula", "mc", "nimfa", "full-state")


@dataclass(frozen=True)
class ExperimentConfig:
    family: str                 # complete | er | powerlaw | edgelist
    graph_params: tuple         # sorted (key, value) pairs
    delta: float
    taus: tuple | None          # explicit taus, or
    xs: tuple | None            # normalized rates (converted via lambda1)
    n_values: tuple
    init_mode: str              # fixed | random
    methods: tuple
    realizations: int
    grid: str                   # "start:step:stop"
    sample_time: float
    seed: int
    out: str

    def validate(self):
        if self.family not in ("complete", "er", "powerlaw", "edgelist"):
            raise ConfigError(f"unknown graph family {self.family!r}")
        if (self.taus is None) == (self.xs is None):
            raise ConfigError("exactly one of 'tau' and 'x' must be given")
        if self.init_mode not in ("fixed", "random"):
            raise ConfigError(f"init mode must be fixed|random, got {self.init_mode!r}")
        for m in self.methods:
            if m not in VALID_METHODS:
                raise ConfigError(f"unknown method {m!r}")
        if "chain" in self.methods and self.family != "complete":
            raise ConfigError("method 'chain' requires a complete graph")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        gp = dict(self.graph_params)
        if "full-state" in self.methods and gp.get("N", 10**9) > chain.FULL_STATE_MAX_N:
            raise ConfigError(
                f"method 'full-state' requires N <= {chain.FULL_STATE_MAX_N}")
        grid = parse_grid(self.grid)
        if self.sample_time > grid[-1]:
            raise ConfigError("sample_time lies past the end of the grid")


def parse_grid(spec):
    """'start:step:stop' (inclusive) or a comma-separated list of times."""
    try:
        if ":" in spec:
            start, step, stop = (float(v) for v in spec.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step))
            grid = start + step * np.arange(n + 1)
            grid[-1] = stop
        else:
            grid = np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise ConfigError(f"bad grid spec {spec!r}")
    if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must start at 0 and increase strictly")
    return grid


def _fmt(v):
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def emit_config(cfg):
    """Serialize a config to its INI text form (round-trips exactly)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep key case (e.g. 'N')
    cp["graph"] = {"family": cfg.family}
    for k, v in cfg.graph_params:
        cp["graph"][k] = _fmt(v)
    cp["epidemic"] = {"delta": _fmt(cfg.delta)}
    if cfg.taus is not None:
        cp["epidemic"]["tau"] = ",".join(_fmt(t) for t in cfg.taus)
    else:
        cp["epidemic"]["x"] = ",".join(_fmt(x) for x in cfg.xs)
    cp["init"] = {"n": ",".join(str(n) for n in cfg.n_values),
                  "mode": cfg.init_mode}
    cp["run"] = {
        "methods": ",".join(cfg.methods),
        "realizations": str(cfg.realizations),
        "grid": cfg.grid,
        "sample_time": _fmt(cfg.sample_time),
        "seed": str(cfg.seed),
        "out": cfg.out,
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


_GRAPH_KEY_TYPES = {"N": int, "seed": int, "p": float, "exponent": float,
                    "path": str}


def parse_config(text):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text)
        family = cp["graph"]["family"]
        gp = []
        for k, v in cp["graph"].items():
            if k == "family":
                continue
            typ = _GRAPH_KEY_TYPES.get(k)
            if typ is None:
                raise ConfigError(f"unknown graph key {k!r}")
            gp.append((k, typ(v)))
        epi = cp["epidemic"]
        taus = xs = None
        if "tau" in epi:
            taus = tuple(float(v) for v in epi["tau"].split(","))
        if "x" in epi:
            xs = tuple(float(v) for v in epi["x"].split(","))
        run = cp["run"]
        cfg = ExperimentConfig(
            family=family,
            graph_params=tuple(sorted(gp)),
            delta=float(epi.get("delta", "1")),
            taus=taus,
            xs=xs,
            n_values=tuple(int(v) for v in cp["init"]["n"].split(",")),
            init_mode=cp["init"].get("mode", "fixed"),
            methods=tuple(run["methods"].split(",")),
            realizations=int(run["realizations"]),
            grid=run["grid"],
            sample_time=float(run["sample_time"]),
            seed=int(run["seed"]),
            out=run.get("out", "."),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid experiment config: {exc}") from exc
    cfg.validate()
    return cfg


def load_config(name_or_path):
    """Load a config from a file path or a bundled preset name."""
    p = Path(name_or_path)
    if p.is_file():
        return parse_config(p.read_text())
    res = resources.files("episis.presets") / f"{name_or_path}.cfg"
    if res.is_file():
        return parse_config(res.read_text())
    raise ConfigError(f"no config file or preset named {name_or_path!r}")


def build_graph(cfg):
    gp = dict(cfg.graph_params)
    if cfg.family == "complete":
        return complete_graph(gp["N"])
    if cfg.family == "er":
        return er_graph(gp["N"], gp["p"], gp["seed"])
    if cfg.family == "powerlaw":
        return powerlaw_graph(gp["N"], gp["exponent"], gp["seed"])
    return load_edge_list(gp["path"])


def run_experiment(cfg, out_dir=None, scale=1, workers=1):
    """Execute every requested method for every (rate, n) cell.

    Returns the summary rows; writes one CSV per method plus
    summary.csv under out_dir (default: cfg.out).
    """
    cfg.validate()
    out = Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    g = build_graph(cfg)
    lam1 = spectral_radius(g).value
    grid = parse_grid(cfg.grid)
    if not np.any(np.abs(grid - cfg.sample_time) < 1e-12):
        grid = np.sort(np.append(grid, cfg.sample_time))
    R = max(1, cfg.realizations // scale)

    if cfg.taus is not None:
        cells = [(tau * lam1, tau) for tau in cfg.taus]
    else:
        cells = [(x, x / lam1) for x in cfg.xs]

    writers = {}
    files = []

    def method_writer(method, header):
        if method not in writers:
            fh = open(out / f"{method.replace('-', '_')}.csv", "w", newline="")
            files.append(fh)
            w = csv.writer(fh)
            w.writerow(header)
            writers[method] = w
        return writers[method]

    summary = []
    try:
        for x, tau in cells:
            params = EpidemicParams.from_tau(tau, cfg.delta)
            for n in cfg.n_values:
                row = {"x": x, "n": n, "dieout_formula": "",
                       "dieout_ruin": "", "dieout_chain": "",
                       "dieout_mc": "", "mc_ci": ""}
                if "formula" in cfg.methods:
                    val = ruin.dieout_approx(max(x, 1.0), n)
                    method_writer("formula", ["x", "n", "dieout"]).writerow(
                        [x, n, val])
                    row["dieout_formula"] = val
                if "ruin" in cfg.methods:
                    mu = ruin.gamblers_ruin(g.node_count, tau, n)
                    method_writer("ruin", ["x", "n", "mu"]).writerow([x, n, mu])
                    row["dieout_ruin"] = mu
                if "chain" in cfg.methods:
                    gen = chain.build_generator(g.node_count, params)
                    sol = chain.solve_transient(gen, n, grid)
                    s0 = chain.dieout_trace(sol)
                    y = chain.prevalence_trace(sol)
                    w = method_writer("chain", ["x", "n", "t", "s0", "y"])
                    for k, t in enumerate(sol.times):
                        w.writerow([x, n, t, s0[k], y[k]])
                    i = int(np.argmin(np.abs(grid - cfg.sample_time)))
                    row["dieout_chain"] = s0[i]
                if "full-state" in cfg.methods:
                    init = list(range(n))
                    d, y = chain.full_state_solver(g, params, init, grid)
                    w = method_writer("full_state",
                                      ["x", "n", "t", "dieout", "prevalence"])
                    for k, t in enumerate(grid):
                        w.writerow([x, n, t, d[k], y[k]])
                if "mc" in cfg.methods:
                    policy = (RandomNodes(n) if cfg.init_mode == "random"
                              else FixedNodes(range(n)))
                    stats = run_ensemble(g, params, policy, R, cfg.seed,
                                         grid, workers=workers)
                    w = method_writer("mc", ["x", "n", "t", "R", "dieout",
                                             "dieout_ci", "prevalence",
                                             "cond_prevalence"])
                    for k, t in enumerate(stats.times):
                        w.writerow([x, n, t, R, stats.dieout[k],
                                    stats.dieout_ci[k], stats.prevalence[k],
                                    stats.cond_prevalence[k]])
                    est, ci = dieout_at(stats, cfg.sample_time)
                    row["dieout_mc"] = est
                    row["mc_ci"] = ci
                if "nimfa" in cfg.methods:
                    v0 = np.full(g.node_count, n / g.node_count)
                    sol = nimfa.solve_nimfa(g, params, v0, grid)
                    y1 = sol.prevalence
                    f = ruin.survival_function(max(x, 1.0), n, lam1, grid)
                    w = method_writer("nimfa",
                                      ["x", "n", "t", "y1", "f", "y_corrected"])
                    for k, t in enumerate(grid):
                        w.writerow([x, n, t, y1[k], f[k], y1[k] * f[k]])
                summary.append(row)
    finally:
        for fh in files:
            fh.close()

    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["x", "n", "dieout_formula",
                                           "dieout_ruin", "dieout_chain",
                                           "dieout_mc", "mc_ci"])
        w.writeheader()
        w.writerows(summary)
    return summary
