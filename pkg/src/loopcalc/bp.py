"""Belief propagation as a gauge-fixing condition.

Notation follows the gauge picture: ``eps[(a, b)]`` is the ground row of the
gauge matrix acting on the factor of ``a`` along edge ``ab``.  In message
language it is the (normalised) message arriving at ``a`` from ``b``, and
``eta[(a, b)] = log eps[(a, b)]``.

The fixed-point condition is, for every directed edge,

    rho_a * eps[(b, a)] = cavity_ab,    rho_a = sum f_a prod_c eps[(a, c)],

where ``cavity_ab`` sums ``f_a`` times all ground rows at ``a`` except the one
for ``b``.  Each sweep applies this map synchronously, damps, and rescales
every edge pair so that ``sum eps_ab * eps_ba == 1`` (split evenly between
the two directions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bethe import BeliefSet
from .gauge import ExcitedBasisScheme, GaugeError, GaugeSet, complete_excited_gauge
from .model import ModelSpec


class ConvergenceError(RuntimeError):
    """BP failed to converge; the partial fixed point is attached."""

    def __init__(self, message, fixed_point=None):
        super().__init__(message)
        self.fixed_point = fixed_point


@dataclass(frozen=True)
class BpOptions:
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10_000
    init: str = "uniform"
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.init not in ("uniform", "seeded-random"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class BpFixedPoint:
    ground: dict
    rho: dict
    z0: float
    f0: float
    converged: bool
    iterations: int
    residual: float
    form: str = "message"
    failed: bool = False
    messages: dict | None = field(default=None, repr=False)


def _directed(model):
    return [(a, b) for a in model.vertices for b in model.neighbors(a)]


def cavities(model: ModelSpec, eps: dict, a):
    """Return ``(rho_a, {b: cavity_ab})`` for vertex ``a``."""
    t = model.tensor(a)
    nbrs = model.neighbors(a)
    deg = len(nbrs)
    if deg == 0:
        return float(t), {}
    vecs = [eps[(a, b)] for b in nbrs]
    cav = {}
    for k, b in enumerate(nbrs):
        r = t
        # contracting from the last axis down leaves axis j at position j
        for j in range(deg - 1, -1, -1):
            if j != k:
                r = np.tensordot(r, vecs[j], axes=([j], [0]))
        cav[b] = r
    rho = float(cav[nbrs[0]] @ vecs[0])
    return rho, cav


def vertex_rho(model: ModelSpec, eps: dict, a) -> float:
    t = model.tensor(a)
    for k in range(model.degree(a) - 1, -1, -1):
        t = np.tensordot(t, eps[(a, model.neighbors(a)[k])], axes=([k], [0]))
    return float(t)


def _uniform_eps(model):
    v = np.full(model.q, 1.0 / math.sqrt(model.q))
    return {d: v.copy() for d in _directed(model)}


def _random_eps(model, seed):
    rng = np.random.default_rng(seed)
    eps = {}
    for u, v in model.edges:
        eps[(u, v)] = np.exp(rng.uniform(-1.0, 1.0, model.q))
        eps[(v, u)] = np.exp(rng.uniform(-1.0, 1.0, model.q))
    return _normalise_pairs(model, eps)


def _normalise_pairs(model, eps):
    out = dict(eps)
    for u, v in model.edges:
        s = float(eps[(u, v)] @ eps[(v, u)])
        if s == 0 or not math.isfinite(s):
            raise FloatingPointError(f"edge {u}-{v}: degenerate normalisation {s!r}")
        scale = 1.0 / math.sqrt(abs(s))
        out[(u, v)] = eps[(u, v)] * scale
        out[(v, u)] = eps[(v, u)] * scale * (1.0 if s > 0 else -1.0)
    return out


def _candidate(model, eps):
    """Right-hand side of the ground-gauge equation for every directed edge."""
    cand = {}
    for a in model.vertices:
        rho, cav = cavities(model, eps, a)
        if rho == 0 or not math.isfinite(rho):
            raise FloatingPointError(f"vertex {a}: degenerate normaliser {rho!r}")
        for b, c in cav.items():
            cand[(b, a)] = c / rho
    return cand


def bp_solve(model: ModelSpec, opts: BpOptions = BpOptions()) -> BpFixedPoint:
    """Synchronous damped BP.

    Positive models iterate log-messages; sign-indefinite models (higher tower
    levels) iterate the ground rows directly.  Convergence requires both the
    per-sweep change and :func:`bp_residual` to fall below ``opts.tol``.  Non-convergence and non-finite
    states are reported in the result, never raised.
    """
    positive = model.is_positive()
    form = "message" if positive else "epsilon"
    eps = (_random_eps(model, opts.seed) if opts.init == "seeded-random"
           else _uniform_eps(model))
    d = opts.damping
    change = math.inf
    it = 0
    failed = False
    converged = False
    with np.errstate(all="ignore"):
        while it < opts.max_iter:
            it += 1
            try:
                cand = _candidate(model, eps)
                if positive:
                    if any(np.any(c <= 0) for c in cand.values()):
                        raise FloatingPointError("non-positive message")
                    new = {k: np.exp((1 - d) * np.log(cand[k]) + d * np.log(eps[k]))
                           for k in eps}
                else:
                    new = {k: (1 - d) * cand[k] + d * eps[k] for k in eps}
                new = _normalise_pairs(model, new)
            except FloatingPointError:
                failed = True
                break
            if positive:
                change = max((float(np.max(np.abs(np.log(new[k]) - np.log(eps[k]))))
                              for k in eps), default=0.0)
            else:
                change = max((float(np.max(np.abs(new[k] - eps[k]))) for k in eps),
                             default=0.0)
            if not math.isfinite(change) or not all(np.all(np.isfinite(v)) for v in new.values()):
                failed = True
                break
            eps = new
            # message change alone can stop short of the absolute residual
            if change < opts.tol and _residual(model, eps) < opts.tol:
                converged = True
                break
    return _finish(model, eps, converged and not failed, it, change, form, failed)


def _finish(model, eps, converged, it, change, form, failed):
    rho = {a: vertex_rho(model, eps, a) for a in model.vertices}
    z0 = math.prod(rho.values())
    f0 = -math.log(z0) if z0 > 0 else math.nan
    msgs = None
    if form == "message" and all(np.all(v > 0) for v in eps.values()):
        msgs = {k: np.log(v) for k, v in eps.items()}
    return BpFixedPoint(ground=eps, rho=rho, z0=z0, f0=f0, converged=converged,
                        iterations=it, residual=change, form=form, failed=failed,
                        messages=msgs)


def fixed_point_from_ground(model: ModelSpec, eps: dict) -> BpFixedPoint:
    """Wrap externally supplied ground rows (no iteration)."""
    return _finish(model, {k: np.asarray(v, float) for k, v in eps.items()},
                   False, 0, math.nan, "epsilon", False)


def _residual(model, eps):
    worst = 0.0
    for a in model.vertices:
        rho, cav = cavities(model, eps, a)
        for b, c in cav.items():
            worst = max(worst, float(np.max(np.abs(rho * eps[(b, a)] - c))))
    return worst


def bp_residual(model: ModelSpec, fp: BpFixedPoint) -> float:
    """Max violation of ``rho_a * eps_ba - cavity_ab`` over directed edges."""
    return _residual(model, fp.ground)


def z0(model: ModelSpec, fp: BpFixedPoint) -> float:
    return math.prod(vertex_rho(model, fp.ground, a) for a in model.vertices)


def beliefs(model: ModelSpec, fp: BpFixedPoint) -> BeliefSet:
    eps = fp.ground
    edge = {(u, v): eps[(u, v)] * eps[(v, u)] for u, v in model.edges}
    vert = {}
    for a in model.vertices:
        t = model.tensor(a).copy()
        for k, b in enumerate(model.neighbors(a)):
            shape = [1] * t.ndim
            shape[k] = model.q
            t = t * eps[(a, b)].reshape(shape)
        vert[a] = (t / fp.rho[a]).reshape(-1)
    return BeliefSet(vertex=vert, edge=edge)


def complete_bp_gauge(model: ModelSpec, fp: BpFixedPoint,
                      scheme: ExcitedBasisScheme = ExcitedBasisScheme()) -> GaugeSet:
    """Full dual gauge whose ground rows are the BP solution."""
    if scheme.variant == "binary-paper" and model.q != 2:
        raise GaugeError("binary-paper scheme needs q = 2")
    rng = np.random.default_rng(scheme.seed) if scheme.seed is not None else None
    mats = {}
    for u, v in model.edges:
        try:
            g_uv, g_vu = complete_excited_gauge(fp.ground[(u, v)], fp.ground[(v, u)],
                                                scheme, rng=rng)
        except GaugeError as exc:
            raise GaugeError(f"edge {u}-{v}: {exc}") from exc
        mats[(u, v)] = g_uv
        mats[(v, u)] = g_vu
    return GaugeSet(model.q, mats)


def check_no_loose_ends(model: ModelSpec, gauges: GaugeSet) -> float:
    """Largest gauged-factor entry with exactly one excited edge, relative to ``rho_a``."""
    from .gauge import gauge_tensor

    worst = 0.0
    for a in model.vertices:
        t = gauge_tensor(model, gauges, a)
        deg = t.ndim
        ground = abs(float(t[(0,) * deg])) if deg else abs(float(t))
        for k in range(deg):
            idx = [0] * deg
            idx[k] = slice(1, None)
            vals = np.abs(t[tuple(idx)])
            if vals.size:
                worst = max(worst, float(np.max(vals)) / (ground if ground > 0 else 1.0))
    return worst
