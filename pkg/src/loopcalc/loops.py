"""Generalized loops and the binary loop series."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bethe import BeliefSet
from .bp import BpFixedPoint, BpOptions, ConvergenceError, beliefs as bp_beliefs, bp_solve
from .exact import DEFAULT_MAX_TERMS, GuardExceeded, exact_partition
from .model import ModelSpec, edge_key

MAX_LOOP_EDGES = 30
FROZEN_TOL = 1e-12


class LoopError(ValueError):
    pass


@dataclass(frozen=True)
class GeneralizedLoop:
    """Edge subset in which every touched vertex has degree two or more."""

    edges: tuple

    @property
    def vertices(self) -> tuple:
        return tuple(sorted({v for e in self.edges for v in e}))

    def degree(self, a) -> int:
        return sum(a in e for e in self.edges)

    def __len__(self):
        return len(self.edges)


@dataclass
class LoopTermBreakdown:
    loop: GeneralizedLoop
    m: dict
    mu: dict
    r: float
    frozen: bool = False


@dataclass
class LoopSeriesReport:
    z0: float
    terms: list
    series_total: float
    exact_z: float | None = None
    relative_residual: float | None = None
    truncated: bool = False
    flagged: list = field(default_factory=list)
    bp: BpFixedPoint | None = field(default=None, repr=False)


def is_generalized_loop(edges) -> bool:
    if not edges:
        return False
    deg = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return min(deg.values()) >= 2


def _canonical_order(loops, model_edges):
    pos = {e: i for i, e in enumerate(model_edges)}
    return sorted(loops, key=lambda lp: (len(lp.edges), [pos[e] for e in lp.edges]))


def enumerate_generalized_loops(model: ModelSpec, max_edges: int | None = None,
                                *, edges=None) -> list[GeneralizedLoop]:
    """All generalized loops, ordered by size then lexicographically by edge position.

    Depth-first include/exclude over edges in canonical order; a branch dies as
    soon as some vertex has all of its edges decided and exactly one included.
    """
    edges = list(model.edges if edges is None else edges)
    if len(edges) > MAX_LOOP_EDGES:
        raise GuardExceeded(f"loop enumeration over {len(edges)} edges exceeds guard "
                            f"{MAX_LOOP_EDGES}")
    cap = len(edges) if max_edges is None else max_edges
    remaining = {}
    for u, v in edges:
        remaining[u] = remaining.get(u, 0) + 1
        remaining[v] = remaining.get(v, 0) + 1
    deg = dict.fromkeys(remaining, 0)
    chosen = []
    found = []

    def dfs(i):
        if i == len(edges):
            if chosen and all(d != 1 for d in deg.values()):
                found.append(GeneralizedLoop(tuple(chosen)))
            return
        u, v = edges[i]
        remaining[u] -= 1
        remaining[v] -= 1
        if len(chosen) < cap:
            deg[u] += 1
            deg[v] += 1
            chosen.append((u, v))
            if not _dead(u) and not _dead(v):
                dfs(i + 1)
            chosen.pop()
            deg[u] -= 1
            deg[v] -= 1
        if not _dead(u) and not _dead(v):
            dfs(i + 1)
        remaining[u] += 1
        remaining[v] += 1

    def _dead(a):
        return remaining[a] == 0 and deg[a] == 1

    dfs(0)
    return _canonical_order(found, edges)


def brute_force_loops(model: ModelSpec) -> list[GeneralizedLoop]:
    """Filter every edge subset; reference for :func:`enumerate_generalized_loops`."""
    out = []
    for k in range(1, len(model.edges) + 1):
        for sub in itertools.combinations(model.edges, k):
            if is_generalized_loop(sub):
                out.append(GeneralizedLoop(tuple(sub)))
    return _canonical_order(out, model.edges)


def _require_binary(q):
    if q != 2:
        raise LoopError(f"binary loop formulas need q = 2, got q = {q}")


def edge_magnetization(beliefs: BeliefSet, edge) -> float:
    b = np.asarray(beliefs.edge[edge_key(*edge)])
    _require_binary(b.shape[0])
    return float(b[0] - b[1])


def vertex_loop_factor(model: ModelSpec, beliefs: BeliefSet, vertex, loop: GeneralizedLoop,
                       m: dict | None = None) -> float:
    _require_binary(model.q)
    in_loop = set(loop.edges)
    nbrs = model.neighbors(vertex)
    if not any(edge_key(vertex, b) in in_loop for b in nbrs):
        raise LoopError(f"vertex {vertex!r} is not touched by the loop")
    t = np.asarray(beliefs.vertex[vertex], dtype=float).reshape((2,) * len(nbrs))
    for k in range(len(nbrs) - 1, -1, -1):
        e = edge_key(vertex, nbrs[k])
        if e in in_loop:
            mab = m[e] if m is not None else edge_magnetization(beliefs, e)
            w = np.array([1.0 - mab, -1.0 - mab])
        else:
            w = np.ones(2)
        t = np.tensordot(t, w, axes=([k], [0]))
    return float(t)


def loop_term_binary(model: ModelSpec, beliefs: BeliefSet,
                     loop: GeneralizedLoop) -> LoopTermBreakdown:
    _require_binary(model.q)
    m = {e: edge_magnetization(beliefs, e) for e in loop.edges}
    mu = {a: vertex_loop_factor(model, beliefs, a, loop, m) for a in loop.vertices}
    denom = math.prod(1.0 - m[e] ** 2 for e in loop.edges)
    frozen = min(1.0 - m[e] ** 2 for e in loop.edges) < FROZEN_TOL
    r = math.nan if frozen else math.prod(mu.values()) / denom
    return LoopTermBreakdown(loop=loop, m=m, mu=mu, r=r, frozen=frozen)


def loop_series_binary(model: ModelSpec, bp_opts: BpOptions = BpOptions(), *,
                       max_edges: int | None = None,
                       max_terms: int = DEFAULT_MAX_TERMS,
                       with_exact: bool = True,
                       fp: BpFixedPoint | None = None) -> LoopSeriesReport:
    """``Z = Z0 (1 + sum_C r(C))`` over generalized loops, from one BP solution."""
    _require_binary(model.q)
    if fp is None:
        fp = bp_solve(model, bp_opts)
    if not fp.converged:
        raise ConvergenceError(
            f"BP did not converge (iterations={fp.iterations}, change={fp.residual:.3e})", fp)
    bel = bp_beliefs(model, fp)
    terms, flagged = [], []
    for loop in enumerate_generalized_loops(model, max_edges):
        term = loop_term_binary(model, bel, loop)
        (flagged if term.frozen else terms).append(term)
    acc = 1.0
    for t in terms:
        acc += t.r
    total = fp.z0 * acc
    exact_z = residual = None
    if with_exact and model.n_configs <= max_terms:
        exact_z = exact_partition(model, max_terms)
        residual = abs(total - exact_z) / abs(exact_z)
    return LoopSeriesReport(z0=fp.z0, terms=terms, series_total=total, exact_z=exact_z,
                            relative_residual=residual, truncated=max_edges is not None,
                            flagged=flagged, bp=fp)
