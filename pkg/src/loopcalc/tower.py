"""Loop tower: recursive q-ary decomposition of the partition function.

At each node the model is BP-gauged, the ground configuration gives ``z0`` and
every generalized loop of the node's graph spawns a child model on that loop
with one letter fewer.  Internal letters are relabelled per level so the
ground letter is always 0; internal letter ``k`` of a child stands for parent
row ``k + 1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bp import BpOptions, bp_solve, check_no_loose_ends, complete_bp_gauge
from .exact import DEFAULT_MAX_TERMS, GuardExceeded, check_guard, config_weights
from .gauge import (ExcitedBasisScheme, GaugeError, GaugeSet, apply_gauge,
                    complete_excited_gauge, gauge_tensor, identity_gauge, random_orthogonal)
from .loops import GeneralizedLoop, enumerate_generalized_loops, is_generalized_loop
from .model import ModelSpec, make_model

MAX_FALLBACK_EDGES = 16
LOOSE_END_TOL = 1e-8

__all__ = [
    "ExcitedBasisScheme", "TowerLevel", "TowerNode", "TowerReport", "TowerOptions",
    "complete_excited_gauge", "reduce_model", "tower_decompose", "subgraph_decompose_full",
    "rotate_excited",
]


@dataclass
class TowerLevel:
    level: int
    parent_loop: tuple
    model: ModelSpec

    @property
    def letter_offset(self) -> int:
        return self.level


@dataclass
class TowerNode:
    level: int
    loop: tuple | None
    q: int
    mode: str
    z0: float
    total: float = 0.0
    children: list = field(default_factory=list)
    bp_converged: bool | None = None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class TowerReport:
    root: TowerNode
    exact_z: float | None = None
    relative_residual: float | None = None

    @property
    def z(self) -> float:
        return self.root.total


@dataclass(frozen=True)
class TowerOptions:
    scheme: ExcitedBasisScheme = ExcitedBasisScheme()
    bp: BpOptions = BpOptions()
    force_fallback: bool = False
    max_terms: int = DEFAULT_MAX_TERMS
    max_fallback_edges: int = MAX_FALLBACK_EDGES


def rotate_excited(gauges: GaugeSet, seed: int) -> GaugeSet:
    """Mix the excited rows of every ``G_ab`` by a random orthogonal matrix.

    ``G_ba`` is recomputed as the inverse-transpose, so duality and the ground
    rows are preserved.
    """
    rng = np.random.default_rng(seed)
    q = gauges.q
    mats = {}
    for u, v in gauges.edges():
        g = gauges[(u, v)].copy()
        g[1:] = random_orthogonal(q - 1, rng) @ g[1:]
        mats[(u, v)] = g
        mats[(v, u)] = np.linalg.inv(g).T
    return GaugeSet(q, mats)


def reduce_model(level_model: ModelSpec, gauges: GaugeSet, loop, *,
                 require_loop: bool = True) -> TowerLevel:
    """Child model on ``loop`` with the excited letters of the parent.

    Off-loop edges are pinned to the ground letter.  Vertices the loop does not
    touch contribute their ground value; that constant is folded into the
    table of the first touched vertex so the child's partition function equals
    the parent's trace restricted to colourings supported exactly on the loop.
    """
    loop_edges = tuple(loop.edges if isinstance(loop, GeneralizedLoop) else loop)
    if not set(loop_edges) <= set(level_model.edges):
        raise ValueError("loop is not a subgraph of the level graph")
    if require_loop and not is_generalized_loop(loop_edges):
        raise ValueError(f"{loop_edges} is not a generalized loop")
    in_loop = set(loop_edges)
    touched = sorted({v for e in loop_edges for v in e})
    adj = {a: [] for a in touched}
    for u, v in loop_edges:
        adj[u].append(v)
        adj[v].append(u)
    outside = 1.0
    tables = {}
    for a in level_model.vertices:
        t = gauge_tensor(level_model, gauges, a)
        idx = tuple(slice(1, None) if (a, b) in in_loop or (b, a) in in_loop else 0
                    for b in level_model.neighbors(a))
        sub = t[idx] if idx else t
        if a in adj:
            tables[a] = np.asarray(sub, dtype=float).reshape(-1)
        else:
            outside *= float(sub)
    if touched:
        tables[touched[0]] = tables[touched[0]] * outside
    child = make_model(level_model.q - 1, adj, tables, level=level_model.level + 1,
                       positivity_required=False)
    return TowerLevel(level=child.level, parent_loop=loop_edges, model=child)


def subgraph_decompose_full(model: ModelSpec, gauges: GaugeSet,
                            max_terms: int = DEFAULT_MAX_TERMS):
    """Group every graphic-trace term by its coloured support.

    Returns ``(groups, total)`` where ``groups`` maps the support (a tuple of
    edges, canonical order) to the summed trace terms with that support.
    """
    check_guard(model, max_terms)
    gauged = apply_gauge(model, gauges)
    w = config_weights(gauged, max_terms)
    ne = len(model.edges)
    n = w.shape[0]
    idx = np.arange(n, dtype=np.int64)
    mask = np.zeros(n, dtype=np.int64)
    for e in range(ne):
        digit = (idx // model.q ** (ne - 1 - e)) % model.q
        mask |= (digit != 0).astype(np.int64) << e
    sums = np.bincount(mask, weights=w, minlength=2 ** ne)
    groups = {}
    for bits in range(2 ** ne):
        support = tuple(model.edges[e] for e in range(ne) if bits >> e & 1)
        groups[support] = float(sums[bits])
    total = 0.0
    for bits in range(2 ** ne):
        total += float(sums[bits])
    return groups, total


def _terminal(level_model, loop):
    total = math.prod(float(level_model.tables[a][0]) for a in level_model.vertices)
    return TowerNode(level=level_model.level, loop=loop, q=1, mode="terminal",
                     z0=total, total=total)


def _bp_gauge(level_model, opts):
    fp = bp_solve(level_model, opts.bp)
    if not fp.converged:
        return None, fp
    try:
        gauges = complete_bp_gauge(level_model, fp, opts.scheme)
    except GaugeError:
        return None, fp
    if check_no_loose_ends(level_model, gauges) > LOOSE_END_TOL:
        return None, fp
    return gauges, fp


def _node(level_model: ModelSpec, loop, opts: TowerOptions) -> TowerNode:
    if level_model.q == 1:
        return _terminal(level_model, loop)
    gauges = fp = None
    if not opts.force_fallback:
        gauges, fp = _bp_gauge(level_model, opts)
    if gauges is not None:
        mode = "bp-gauge"
        where = f"level {level_model.level}, loop {loop}"
        try:
            supports = [lp.edges for lp in enumerate_generalized_loops(level_model)]
        except GuardExceeded as exc:
            raise GuardExceeded(f"{where}: {exc}") from exc
    else:
        mode = "full-subgraph"
        gauges = identity_gauge(level_model)
        ne = len(level_model.edges)
        if ne > opts.max_fallback_edges:
            raise GuardExceeded(f"level {level_model.level}, loop {loop}: full-subgraph "
                                f"fallback over {ne} edges exceeds guard "
                                f"{opts.max_fallback_edges}")
        supports = [s for k in range(1, ne + 1)
                    for s in itertools.combinations(level_model.edges, k)]
    ground = 1.0
    for a in level_model.vertices:
        t = gauge_tensor(level_model, gauges, a)
        ground *= float(t[(0,) * t.ndim]) if t.ndim else float(t)
    node = TowerNode(level=level_model.level, loop=loop, q=level_model.q, mode=mode,
                     z0=ground, bp_converged=None if fp is None else fp.converged)
    for s in supports:
        child = reduce_model(level_model, gauges, s, require_loop=(mode == "bp-gauge"))
        node.children.append(_node(child.model, s, opts))
    total = node.z0
    for c in node.children:
        total += c.total
    node.total = total
    return node


def tower_decompose(model: ModelSpec, opts: TowerOptions = TowerOptions(), *,
                    with_exact: bool = True) -> TowerReport:
    """Loop-tower value of the partition function.

    Nodes whose BP does not converge (or whose gauge cannot be completed)
    switch to the full-subgraph mode: identity gauge, one child per nonempty
    edge subset.  That regrouping is exact for any dual gauge.
    """
    if model.q < 2:
        raise ValueError("tower decomposition needs q >= 2")
    root = _node(model, None, opts)
    report = TowerReport(root=root)
    if with_exact and model.n_configs <= opts.max_terms:
        from .exact import exact_partition
        report.exact_z = exact_partition(model, opts.max_terms)
        report.relative_residual = abs(root.total - report.exact_z) / abs(report.exact_z)
    return report
