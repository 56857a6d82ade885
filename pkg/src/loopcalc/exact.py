"""Brute-force oracle: exact partition function, marginals and graphic traces."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import kernels
from .gauge import GaugeSet, require_dual
from .model import ModelSpec, restrict

DEFAULT_MAX_TERMS = 2 ** 24


class GuardExceeded(RuntimeError):
    """An enumeration would exceed its configured size guard."""


@dataclass
class ExactReport:
    z: float
    free_energy: float
    per_edge_marginals: dict
    per_vertex_marginals: dict


def check_guard(model: ModelSpec, max_terms: int = DEFAULT_MAX_TERMS) -> None:
    n = model.n_configs
    if n > max_terms:
        raise GuardExceeded(f"enumeration needs {n} terms "
                            f"(q={model.q}, |E|={len(model.edges)}), guard is {max_terms}")


def exact_partition(model: ModelSpec, max_terms: int = DEFAULT_MAX_TERMS) -> float:
    check_guard(model, max_terms)
    return kernels.partition_sum(model)


def config_weights(model: ModelSpec, max_terms: int = DEFAULT_MAX_TERMS) -> np.ndarray:
    """Unnormalised weight of every configuration, canonical order."""
    check_guard(model, max_terms)
    return kernels.config_weights(model)


def exact_marginals(model: ModelSpec, max_terms: int = DEFAULT_MAX_TERMS) -> ExactReport:
    check_guard(model, max_terms)
    z, edge, vert = kernels.marginal_sums(model)
    return ExactReport(
        z=z,
        free_energy=-math.log(z) if z > 0 else math.nan,
        per_edge_marginals={e: v / z for e, v in edge.items()},
        per_vertex_marginals={a: v / z for a, v in vert.items()},
    )


def trace_term(model: ModelSpec, gauges: GaugeSet, sigma) -> float:
    """One term of the graphic trace: product over vertices of gauged factors."""
    out = 1.0
    for a in model.vertices:
        t = model.tensor(a)
        letters = restrict(model, a, sigma)
        # contract the last axis first so the remaining axes keep their positions
        for k in range(len(letters) - 1, -1, -1):
            b = model.neighbors(a)[k]
            t = np.tensordot(t, gauges[(a, b)][letters[k]], axes=([k], [0]))
        out *= float(t)
    return out


def _kron_gauged_tables(model: ModelSpec, gauges: GaugeSet) -> ModelSpec:
    tables = {}
    for a in model.vertices:
        mats = [gauges[(a, b)] for b in model.neighbors(a)]
        big = reduce(np.kron, mats, np.ones((1, 1)))
        tables[a] = big @ model.tables[a]
    return model.with_tables(tables, positivity_required=False)


def graphic_trace(model: ModelSpec, gauges: GaugeSet,
                  max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Sum of all trace terms; equals the partition function for dual gauges.

    The gauged factors are formed with one Kronecker-product matrix per vertex,
    independently of :func:`loopcalc.gauge.apply_gauge`.
    """
    check_guard(model, max_terms)
    require_dual(gauges)
    return kernels.partition_sum(_kron_gauged_tables(model, gauges))
