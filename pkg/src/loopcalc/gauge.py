"""Edge gauge transformations.

A gauge assigns to every directed edge ``(a, b)`` a ``q x q`` matrix
``G_ab`` acting on the factor of ``a``: rows index the new letter, columns the
old one.  The pair is *dual* when ``G_ab.T @ G_ba == I``, in which case the
partition function is unchanged by the transformation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import ModelSpec, edge_key, format_float

CONSTRUCTION_TOL = 1e-12
CONSUMER_TOL = 1e-8


class GaugeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GaugeSet:
    q: int
    matrices: Mapping[tuple, np.ndarray]

    def __getitem__(self, directed_edge) -> np.ndarray:
        return self.matrices[directed_edge]

    def ground(self, a, b) -> np.ndarray:
        """Row 0 of ``G_ab``."""
        return self.matrices[(a, b)][0]

    def edges(self):
        return sorted({edge_key(a, b) for a, b in self.matrices})

    def replace(self, updates: Mapping[tuple, np.ndarray]) -> "GaugeSet":
        mats = dict(self.matrices)
        mats.update({k: np.array(v, dtype=float) for k, v in updates.items()})
        return GaugeSet(self.q, mats)

    def to_json(self) -> str:
        parts = []
        for (a, b) in sorted(self.matrices):
            rows = ", ".join("[" + ", ".join(format_float(x) for x in row) + "]"
                             for row in self.matrices[(a, b)])
            parts.append(f'  {json.dumps(f"{a}->{b}")}: [{rows}]')
        return "{\n" + ",\n".join(parts) + "\n}\n"

    @classmethod
    def from_json(cls, text: str) -> "GaugeSet":
        doc = json.loads(text)
        mats = {}
        for key, rows in doc.items():
            a, _, b = key.partition("->")
            mats[(a, b)] = np.array(rows, dtype=float)
        q = next(iter(mats.values())).shape[0] if mats else 1
        return cls(q, mats)


def identity_gauge(model: ModelSpec) -> GaugeSet:
    eye = np.eye(model.q)
    mats = {}
    for u, v in model.edges:
        mats[(u, v)] = eye.copy()
        mats[(v, u)] = eye.copy()
    return GaugeSet(model.q, mats)


def random_dual_gauge(model: ModelSpec, seed: int) -> GaugeSet:
    """Random gauge on the dual manifold; ``G_ba`` is the inverse-transpose."""
    rng = np.random.default_rng(seed)
    q = model.q
    mats = {}
    for u, v in model.edges:
        while True:
            g = rng.uniform(-1.0, 1.0, size=(q, q))
            if abs(np.linalg.det(g)) > 0.1:
                break
        mats[(u, v)] = g
        mats[(v, u)] = np.linalg.inv(g).T
    return GaugeSet(q, mats)


def check_duality(gauges: GaugeSet) -> float:
    """Largest entry of ``|G_ab.T @ G_ba - I|`` over all edges."""
    eye = np.eye(gauges.q)
    worst = 0.0
    for u, v in gauges.edges():
        prod = gauges[(u, v)].T @ gauges[(v, u)]
        worst = max(worst, float(np.max(np.abs(prod - eye))))
    return worst


def require_dual(gauges: GaugeSet, tol: float = CONSUMER_TOL) -> None:
    res = check_duality(gauges)
    if not res < tol:
        raise GaugeError(f"duality residual {res:.3e} exceeds {tol:.1e}; "
                         "gauge invariance is not guaranteed")


def gauge_tensor(model: ModelSpec, gauges: GaugeSet, a) -> np.ndarray:
    """Gauged table of ``a`` as a tensor, one axis per neighbour."""
    t = model.tensor(a)
    for k, b in enumerate(model.neighbors(a)):
        t = np.moveaxis(np.tensordot(gauges[(a, b)], t, axes=(1, k)), 0, k)
    return t


def apply_gauge(model: ModelSpec, gauges: GaugeSet, *, check: bool = True) -> ModelSpec:
    """Transform every factor table by the gauge; the result may be sign-indefinite."""
    if check:
        require_dual(gauges)
    tables = {a: gauge_tensor(model, gauges, a).reshape(-1) for a in model.vertices}
    return model.with_tables(tables, positivity_required=False)


def compose(after: GaugeSet, before: GaugeSet) -> GaugeSet:
    """Per-edge product: applying ``before`` then ``after``."""
    return GaugeSet(after.q, {k: after[k] @ before[k] for k in before.matrices})


# -- excited rows ----------------------------------------------------------

@dataclass(frozen=True)
class ExcitedBasisScheme:
    """How the excited rows of a BP gauge are chosen.

    ``binary-paper`` is the closed form valid for two letters only;
    ``gram-schmidt-dual`` works for any alphabet.  A non-``None`` seed mixes the
    excited rows by a random orthogonal matrix afterwards.
    """

    variant: str = "gram-schmidt-dual"
    seed: int | None = None

    def __post_init__(self):
        if self.variant not in ("binary-paper", "gram-schmidt-dual"):
            raise ValueError(f"unknown excited-basis scheme {self.variant!r}")


def complete_excited_gauge(eps_ab, eps_ba, scheme: ExcitedBasisScheme = ExcitedBasisScheme(),
                           rng: np.random.Generator | None = None):
    """Complete a normalised ground pair into a dual matrix pair.

    Row 0 of ``G_ab`` is ``eps_ab``; rows 1.. span the orthogonal complement of
    ``eps_ba``.  ``G_ba`` is the inverse-transpose of ``G_ab``, so its row 0
    reproduces ``eps_ba``.
    """
    eps_ab = np.asarray(eps_ab, dtype=float)
    eps_ba = np.asarray(eps_ba, dtype=float)
    q = eps_ab.shape[0]
    nab, nba = np.linalg.norm(eps_ab), np.linalg.norm(eps_ba)
    if nab < 1e-12 or nba < 1e-12:
        raise GaugeError("near-zero ground vector")
    overlap = float(eps_ab @ eps_ba)
    if abs(overlap - 1.0) > 1e-10:
        raise GaugeError(f"ground pair not normalised: eps_ab . eps_ba = {overlap!r}")
    g = np.empty((q, q))
    g[0] = eps_ab
    if scheme.variant == "binary-paper":
        if q != 2:
            raise GaugeError("binary-paper scheme needs a two-letter alphabet")
        # G_ab(1, s) = (1 - 2s) * eps_ba((s - 1)^2)
        g[1] = (eps_ba[1], -eps_ba[0])
    else:
        g[1:] = _excited_rows_gs(eps_ba / nba)
    if scheme.seed is not None and q > 2:
        rng = rng if rng is not None else np.random.default_rng(scheme.seed)
        g[1:] = random_orthogonal(q - 1, rng) @ g[1:]
    elif scheme.seed is not None and q == 2:
        rng = rng if rng is not None else np.random.default_rng(scheme.seed)
        g[1:] *= rng.choice((-1.0, 1.0)) * rng.uniform(0.5, 2.0)
    return g, np.linalg.inv(g).T


def _excited_rows_gs(unit_ref):
    q = unit_ref.shape[0]
    drop = int(np.argmax(np.abs(unit_ref)))
    basis = [unit_ref]
    rows = []
    for k in range(q):
        if k == drop:
            continue
        v = np.zeros(q)
        v[k] = 1.0
        for u in basis:
            v = v - (v @ u) * u
        nrm = np.linalg.norm(v)
        if nrm < 1e-12:
            raise GaugeError("Gram-Schmidt breakdown")
        v = v / nrm
        basis.append(v)
        rows.append(v)
    return np.array(rows)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n))
    qm, r = np.linalg.qr(z)
    return qm * np.sign(np.diag(r))
