"""JSON report documents.

Floats are written with 17 significant digits so every double round-trips;
key order is fixed by construction, which keeps reports byte-stable.
"""
from __future__ import annotations

import json
import math

import numpy as np

SCHEMA_VERSION = 1


def _enc(x, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, np.ndarray):
        x = x.tolist()
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_enc(v, indent, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(x, (list, tuple)):
        if not x:
            return "[]"
        if all(isinstance(v, (int, float, str, np.floating, np.integer)) for v in x):
            return "[" + ", ".join(_enc(v, indent, level + 1) for v in x) + "]"
        items = [pad + _enc(v, indent, level + 1) for v in x]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(x).__name__}")


def dumps(doc, indent: int = 2) -> str:
    return _enc(doc, indent, 0) + "\n"


def edge_str(e) -> str:
    return f"{e[0]}-{e[1]}"


def directed_str(a, b) -> str:
    return f"{a}->{b}"


def document(command: str, body: dict) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "command": command}
    out.update(body)
    return out


def exact_doc(rep) -> dict:
    return {
        "z": rep.z,
        "free_energy": rep.free_energy,
        "edge_marginals": {edge_str(e): v for e, v in rep.per_edge_marginals.items()},
        "vertex_marginals": dict(rep.per_vertex_marginals),
    }


def bp_doc(fp, beliefs=None, residual=None) -> dict:
    out = {
        "converged": fp.converged,
        "failed": fp.failed,
        "form": fp.form,
        "iterations": fp.iterations,
        "last_change": fp.residual,
        "bp_residual": residual,
        "z0": fp.z0,
        "f0": fp.f0,
        "rho": dict(fp.rho),
        "ground": {directed_str(*k): v for k, v in sorted(fp.ground.items())},
    }
    if fp.messages is not None:
        out["messages"] = {directed_str(*k): v for k, v in sorted(fp.messages.items())}
    if beliefs is not None:
        out["beliefs"] = {
            "edge": {edge_str(e): v for e, v in beliefs.edge.items()},
            "vertex": dict(beliefs.vertex),
        }
    return out


def loops_doc(loops) -> dict:
    return {"count": len(loops), "loops": [[list(e) for e in lp.edges] for lp in loops]}


def series_doc(rep) -> dict:
    terms = [{
        "loop": [list(e) for e in t.loop.edges],
        "m": {edge_str(e): v for e, v in t.m.items()},
        "mu": dict(t.mu),
        "r": t.r,
    } for t in rep.terms]
    return {
        "z0": rep.z0,
        "n_terms": len(rep.terms),
        "terms": terms,
        "series_total": rep.series_total,
        "exact_z": rep.exact_z,
        "relative_residual": rep.relative_residual,
        "exact": not rep.truncated,
        "flagged_frozen": [[list(e) for e in t.loop.edges] for t in rep.flagged],
    }


def tower_node_doc(node) -> dict:
    return {
        "level": node.level,
        "loop": None if node.loop is None else [list(e) for e in node.loop],
        "q": node.q,
        "mode": node.mode,
        "z0": node.z0,
        "total": node.total,
        "children": [tower_node_doc(c) for c in node.children],
    }


def tower_doc(rep) -> dict:
    return {
        "z": rep.z,
        "exact_z": rep.exact_z,
        "relative_residual": rep.relative_residual,
        "root": tower_node_doc(rep.root),
    }


def bethe_doc(eq) -> dict:
    return {
        "f0": eq.f0,
        "fb": eq.fb,
        "phi_bethe": eq.phi_bethe,
        "gaps": {
            "f0_fb": abs(eq.f0 - eq.fb),
            "fb_phi": abs(eq.fb - eq.phi_bethe),
            "f0_phi": abs(eq.f0 - eq.phi_bethe),
        },
        "max_pairwise_gap": eq.max_pairwise_gap,
    }
