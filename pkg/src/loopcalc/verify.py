"""Identity suite run by ``loopcalc verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .bethe import constraint_violations, equivalence_check
from .bp import (BpFixedPoint, BpOptions, beliefs, bp_residual, check_no_loose_ends,
                 complete_bp_gauge)
from .exact import DEFAULT_MAX_TERMS, exact_partition, graphic_trace, trace_term
from .gauge import ExcitedBasisScheme, check_duality, random_dual_gauge
from .loops import enumerate_generalized_loops, loop_series_binary
from .tower import TowerOptions, tower_decompose


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def as_dict(self):
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed}


def _check(out, name, value, tol):
    value = float(value)
    out.append(Check(name, value, tol, bool(math.isfinite(value) and value < tol)))


def _rel(x, y):
    return abs(x - y) / abs(y) if y != 0 else abs(x - y)


def run_checks(model, fp: BpFixedPoint, *, bp_opts: BpOptions = BpOptions(),
               scheme: ExcitedBasisScheme | None = None, seed: int = 0,
               max_terms: int = DEFAULT_MAX_TERMS, n_gauges: int = 5) -> list[Check]:
    """Every identity the model should satisfy, given a converged BP solution."""
    out = []
    if scheme is None:
        scheme = ExcitedBasisScheme("binary-paper" if model.q == 2 else "gram-schmidt-dual")
    feasible = model.n_configs <= max_terms
    z = exact_partition(model, max_terms) if feasible else None

    if feasible:
        worst = max((_rel(graphic_trace(model, random_dual_gauge(model, seed + k), max_terms), z)
                     for k in range(n_gauges)), default=0.0)
        _check(out, "gauge_invariance_rel", worst, 1e-10)

    _check(out, "bp_residual", bp_residual(model, fp), bp_opts.tol)
    gauges = complete_bp_gauge(model, fp, scheme)
    _check(out, "bp_gauge_duality", check_duality(gauges), 1e-10)
    _check(out, "no_loose_ends", check_no_loose_ends(model, gauges), 1e-8)
    zero = {e: 0 for e in model.edges}
    _check(out, "z0_vs_ground_trace_rel", _rel(fp.z0, trace_term(model, gauges, zero)), 1e-12)

    if model.is_positive():
        bel = beliefs(model, fp)
        _check(out, "belief_compatibility", constraint_violations(model, bel).max_compat, 1e-8)
        _check(out, "functional_equivalence_gap", equivalence_check(model, fp).max_pairwise_gap,
               1e-8)

    loops = enumerate_generalized_loops(model)
    if not loops and z is not None:
        _check(out, "tree_z0_vs_exact_rel", _rel(fp.z0, z), 1e-10)

    if model.q == 2 and model.is_positive():
        rep = loop_series_binary(model, bp_opts, max_terms=max_terms, fp=fp,
                                 with_exact=feasible)
        if rep.relative_residual is not None:
            _check(out, "loop_series_rel", rep.relative_residual, 1e-8)
        worst = 0.0
        for t in rep.terms:
            sig = {e: int(e in t.loop.edges) for e in model.edges}
            alt = trace_term(model, gauges, sig) / fp.z0
            if abs(t.r) > 1e-12 and abs(alt) > 1e-12:
                worst = max(worst, _rel(t.r, alt))
        _check(out, "loop_term_two_route_rel", worst, 1e-9)

    if feasible:
        rep = tower_decompose(model, TowerOptions(scheme=ExcitedBasisScheme(), bp=bp_opts,
                                                  max_terms=max_terms))
        _check(out, "tower_rel", rep.relative_residual, 1e-6)
    return out

