"""Variational functionals: exact, Bethe, and the ground-row functional F_B."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelSpec

NEG_SLACK = 1e-12


class FunctionalDomainError(ValueError):
    """A functional was evaluated outside its domain (e.g. log of a non-positive)."""


@dataclass
class BeliefSet:
    vertex: dict
    edge: dict


@dataclass
class ConstraintViolations:
    max_positivity: float
    max_norm: float
    max_compat: float


@dataclass
class EquivalenceReport:
    f0: float
    fb: float
    phi_bethe: float
    max_pairwise_gap: float


def _xlogy(x, y):
    """``x * log(y)`` with the convention ``0 * log(anything) = 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = x[nz] * np.log(y[nz])
    return out


def exact_variational_functional(model: ModelSpec, b, weights=None) -> float:
    """``sum_sigma b log(b / prod_a f_a)`` over the full configuration space."""
    b = np.asarray(b, dtype=float)
    if weights is None:
        from .exact import config_weights
        weights = config_weights(model)
    if b.shape != weights.shape:
        raise ValueError(f"distribution has {b.size} entries, expected {weights.size}")
    if np.any(b < 0):
        raise FunctionalDomainError("negative probability")
    if abs(b.sum() - 1.0) > 1e-10:
        raise FunctionalDomainError(f"distribution not normalised (sum = {b.sum()!r})")
    return float(np.sum(_xlogy(b, b)) - np.sum(_xlogy(b, weights)))


def bethe_functional(model: ModelSpec, beliefs: BeliefSet) -> float:
    total = 0.0
    for a in model.vertices:
        ba = np.asarray(beliefs.vertex[a], dtype=float)
        if np.any(ba < -NEG_SLACK):
            raise FunctionalDomainError(f"negative vertex belief at {a}")
        ba = np.clip(ba, 0.0, None)
        total += float(np.sum(_xlogy(ba, ba)) - np.sum(_xlogy(ba, model.tables[a])))
    for e in model.edges:
        bab = np.asarray(beliefs.edge[e], dtype=float)
        if np.any(bab < -NEG_SLACK):
            raise FunctionalDomainError(f"negative edge belief at {e}")
        bab = np.clip(bab, 0.0, None)
        total -= float(np.sum(_xlogy(bab, bab)))
    return total


def edge_marginal_of_vertex(model: ModelSpec, vec, a, b) -> np.ndarray:
    """Sum a vertex-indexed vector down to the letter on edge ``ab``."""
    t = np.asarray(vec, dtype=float).reshape((model.q,) * model.degree(a))
    k = model.neighbors(a).index(b)
    axes = tuple(i for i in range(t.ndim) if i != k)
    return t.sum(axis=axes)


def constraint_violations(model: ModelSpec, beliefs: BeliefSet) -> ConstraintViolations:
    pos = norm = compat = 0.0
    vecs = list(beliefs.vertex.values()) + list(beliefs.edge.values())
    for v in vecs:
        v = np.asarray(v, dtype=float)
        pos = max(pos, float(np.max(np.clip(-v, 0, None))), float(np.max(np.clip(v - 1, 0, None))))
        norm = max(norm, abs(float(v.sum()) - 1.0))
    for u, v in model.edges:
        bab = np.asarray(beliefs.edge[(u, v)], dtype=float)
        for a, b in ((u, v), (v, u)):
            marg = edge_marginal_of_vertex(model, beliefs.vertex[a], a, b)
            compat = max(compat, float(np.max(np.abs(marg - bab))))
    return ConstraintViolations(pos, norm, compat)


def _vertex_products(model, eps, a):
    t = model.tensor(a)
    for k, b in enumerate(model.neighbors(a)):
        shape = [1] * t.ndim
        shape[k] = model.q
        t = t * np.asarray(eps[(a, b)], dtype=float).reshape(shape)
    return t.reshape(-1)


def stationary_beliefs(model: ModelSpec, eps: dict) -> BeliefSet:
    """Beliefs at the extremum of the Lagrangian for fixed ground rows ``eps``."""
    vert, edge = {}, {}
    for a in model.vertices:
        w = _vertex_products(model, eps, a)
        norm_a = float(w.sum())
        if norm_a == 0:
            raise FunctionalDomainError(f"vanishing vertex normaliser at {a}")
        vert[a] = w / norm_a
    for u, v in model.edges:
        w = np.asarray(eps[(u, v)], float) * np.asarray(eps[(v, u)], float)
        norm_ab = float(w.sum())
        if norm_ab == 0:
            raise FunctionalDomainError(f"vanishing edge normaliser at {u}-{v}")
        edge[(u, v)] = w / norm_ab
    return BeliefSet(vertex=vert, edge=edge)


def fb_functional(model: ModelSpec, eps: dict) -> float:
    """``-sum_a log rho_a + sum_ab log rho_ab``; invariant under per-edge rescaling."""
    total = 0.0
    for a in model.vertices:
        norm_a = float(_vertex_products(model, eps, a).sum())
        if not norm_a > 0:
            raise FunctionalDomainError(f"non-positive vertex normaliser {norm_a!r} at {a}")
        total -= math.log(norm_a)
    for u, v in model.edges:
        norm_ab = float(np.asarray(eps[(u, v)], float) @ np.asarray(eps[(v, u)], float))
        if not norm_ab > 0:
            raise FunctionalDomainError(f"non-positive edge normaliser {norm_ab!r} at {u}-{v}")
        total += math.log(norm_ab)
    return total


def equivalence_check(model: ModelSpec, fp) -> EquivalenceReport:
    """Evaluate -log Z0, F_B and the Bethe functional at a BP fixed point."""
    f0 = -math.log(fp.z0)
    fb = fb_functional(model, fp.ground)
    phi = bethe_functional(model, stationary_beliefs(model, fp.ground))
    gap = max(abs(f0 - fb), abs(fb - phi), abs(f0 - phi))
    return EquivalenceReport(f0=f0, fb=fb, phi_bethe=phi, max_pairwise_gap=gap)
