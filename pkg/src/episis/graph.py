"""Undirected simple graphs, the random generators used in the experiments,
and spectral-radius computation by power iteration."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import EdgeListParseError, NonConvergenceError

POWER_ITERATION_CAP = 100_000


class Graph:
    """Undirected, unweighted simple graph on nodes 0..N-1.

    Edges are stored as a sorted array of (u, v) pairs with u < v.
    Instances are immutable after construction and safe to share
    across threads/processes.
    """

    def __init__(self, node_count, edges):
        if node_count < 1:
            raise ValueError(f"node_count must be >= 1, got {node_count}")
        self.node_count = int(node_count)
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u},{v}) out of range [0,{node_count})")
            canon.add((u, v) if u < v else (v, u))
        if canon:
            arr = np.array(sorted(canon), dtype=np.int64)
        else:
            arr = np.empty((0, 2), dtype=np.int64)
        self.edges = arr
        # CSR adjacency (indptr/indices) used by the simulators and solvers
        self._indptr, self._indices = _build_csr(self.node_count, arr)

    @property
    def edge_count(self):
        return len(self.edges)

    @property
    def degrees(self):
        return np.diff(self._indptr)

    @property
    def csr(self):
        """Adjacency as (indptr, indices) int64 arrays."""
        return self._indptr, self._indices

    def adjacency(self):
        """Adjacency matrix as a scipy CSR sparse matrix."""
        n = self.node_count
        data = np.ones(len(self._indices), dtype=np.float64)
        return sp.csr_matrix((data, self._indices, self._indptr), shape=(n, n))

    def neighbors(self, u):
        return self._indices[self._indptr[u]:self._indptr[u + 1]]

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.node_count == other.node_count
            and np.array_equal(self.edges, other.edges)
        )

    def __repr__(self):
        return f"Graph(N={self.node_count}, edges={self.edge_count})"


def _build_csr(n, edges):
    indptr = np.zeros(n + 1, dtype=np.int64)
    if len(edges) == 0:
        return indptr, np.empty(0, dtype=np.int64)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst


@dataclass(frozen=True)
class SpectralRadius:
    """Largest adjacency eigenvalue and the residual actually achieved."""

    value: float
    tolerance: float


def complete_graph(N):
    """Complete graph K_N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    iu = np.triu_indices(N, k=1)
    return Graph(N, np.column_stack(iu))


def star_graph(leaves):
    """Star with one hub (node 0) and the given number of leaves."""
    if leaves < 1:
        raise ValueError("need at least one leaf")
    edges = [(0, i) for i in range(1, leaves + 1)]
    return Graph(leaves + 1, edges)


def er_graph(N, p, seed):
    """Erdos-Renyi G_p(N): each pair kept independently with probability p."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0,1], got {p}")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(N, k=1)
    keep = rng.random(len(iu)) < p
    return Graph(N, np.column_stack((iu[keep], iv[keep])))


def powerlaw_graph(N, exponent, seed, max_rounds=200):
    """Simple graph with degrees drawn from Pr[k] ~ k^(-exponent).

    Degrees are sampled on k in [1, floor(sqrt(N))] and wired by
    configuration-model pairing; self-loops and multi-edges are rejected
    and their stubs re-paired for up to `max_rounds` rounds, after which
    any unmatched stubs are dropped.  An odd stub total is repaired by
    resampling one node's degree.
    """
    if exponent <= 2:
        raise ValueError("exponent must be > 2")
    if N < 10:
        raise ValueError("N must be >= 10")
    rng = np.random.default_rng(seed)
    k_max = math.isqrt(N)
    ks = np.arange(1, k_max + 1)
    pmf = ks.astype(float) ** (-exponent)
    pmf /= pmf.sum()
    degrees = rng.choice(ks, size=N, p=pmf)
    while degrees.sum() % 2 == 1:
        degrees[rng.integers(N)] = rng.choice(ks, p=pmf)

    stubs = np.repeat(np.arange(N), degrees)
    edges = set()
    for _ in range(max_rounds):
        if len(stubs) == 0:
            break
        rng.shuffle(stubs)
        leftover = []
        for i in range(0, len(stubs) - 1, 2):
            u, v = int(stubs[i]), int(stubs[i + 1])
            key = (u, v) if u < v else (v, u)
            if u == v or key in edges:
                leftover.extend(key)
            else:
                edges.add(key)
        if len(stubs) % 2 == 1:  # cannot happen after parity repair
            leftover.append(int(stubs[-1]))
        stubs = np.array(leftover, dtype=np.int64)
    return Graph(N, edges)


def spectral_radius(g, tol=1e-10):
    """Largest eigenvalue of the adjacency matrix by power iteration.

    Starts from the all-ones vector (never orthogonal to the Perron
    vector of any component) and stops when the residual ||Ax - lam*x||
    drops below tol; for a symmetric matrix this guarantees an
    eigenvalue within tol of the returned value.  Iteration runs on the
    shifted matrix A + I so that the Perron eigenvalue strictly
    dominates even when the spectrum is symmetric (bipartite graphs).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if g.edge_count == 0:
        return SpectralRadius(0.0, 0.0)
    A = g.adjacency()
    x = np.ones(g.node_count)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(POWER_ITERATION_CAP):
        y = A @ x
        lam = float(x @ y)
        resid = float(np.linalg.norm(y - lam * x))
        if resid <= tol:
            return SpectralRadius(lam, resid)
        y = y + x  # shift: (A + I) x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return SpectralRadius(0.0, 0.0)
        x = y / ny
    raise NonConvergenceError(
        f"power iteration did not reach tol={tol:g} "
        f"within {POWER_ITERATION_CAP} iterations (last value {lam:.12g})",
        last_iterate=x,
        residual=resid,
    )


def save_edge_list(g, path):
    """Write the graph as '# N=<int>' header plus one 'u v' pair per line."""
    with open(path, "w") as fh:
        fh.write(f"# N={g.node_count}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def load_edge_list(path):
    """Read the edge-list format written by :func:`save_edge_list`."""
    n = None
    edges = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if not body.startswith("N="):
                    raise EdgeListParseError(path, line_no, f"bad header {line!r}")
                try:
                    n = int(body[2:])
                except ValueError:
                    raise EdgeListParseError(path, line_no, f"bad node count in {line!r}")
                if n < 1:
                    raise EdgeListParseError(path, line_no, f"node count must be >= 1, got {n}")
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListParseError(path, line_no, f"expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(path, line_no, f"non-integer node id in {line!r}")
            if n is None:
                raise EdgeListParseError(path, line_no, "missing '# N=<int>' header")
            if u == v:
                raise EdgeListParseError(path, line_no, f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise EdgeListParseError(path, line_no, f"node id out of range [0,{n})")
            edges.append((u, v))
    if n is None:
        raise EdgeListParseError(path, 0, "missing '# N=<int>' header")
    return Graph(n, edges)
