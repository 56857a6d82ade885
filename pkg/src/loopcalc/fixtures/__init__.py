"""Bundled desk-scale models and the builders that generated them."""
from __future__ import annotations

import itertools
import math
from importlib import resources

import numpy as np

from ..model import ModelSpec, edge_key, load_model, make_model, parse_model


def from_edges(q: int, edges, tables=None, *, vertices=None, seed=None, low=0.5, high=1.5,
               level=0) -> ModelSpec:
    """Model on an edge list; tables given, or drawn i.i.d. uniform(low, high) by seed."""
    adj = {v: [] for v in (vertices or [])}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    if tables is None:
        rng = np.random.default_rng(seed)
        tables = {a: rng.uniform(low, high, size=q ** len(adj[a])) for a in sorted(adj)}
    return make_model(q, adj, tables, level=level)


def ising_pair_table(j: float) -> list:
    """Degree-2 table ``exp(J s1 s2)`` with spins ``s = 2 sigma - 1``."""
    return [math.exp(j * (2 * s1 - 1) * (2 * s2 - 1)) for s1 in (0, 1) for s2 in (0, 1)]


TRIANGLE = [("a", "b"), ("a", "c"), ("b", "c")]
K4 = [tuple(p) for p in itertools.combinations("abcd", 2)]
PATH3 = [("a", "b"), ("b", "c")]
TREE5 = [("a", "b"), ("a", "c"), ("a", "d"), ("d", "e")]


def single_edge():
    return from_edges(2, [("a", "b")], {"a": [1, 1], "b": [1, 1]})


def path3():
    return from_edges(2, PATH3, {"a": [3.0, 1.0], "b": [1.0] * 4, "c": [1.0, 1.0]})


def triangle_ones(q=2):
    return from_edges(q, TRIANGLE, {v: [1.0] * q ** 2 for v in "abc"})


def ising_triangle(j=0.3):
    return from_edges(2, TRIANGLE, {v: ising_pair_table(j) for v in "abc"})


def k4(q=2, seed=42):
    return from_edges(q, K4, seed=seed)


def triangle(q, seed):
    return from_edges(q, TRIANGLE, seed=seed)


def tree5(q=2, seed=3):
    return from_edges(q, TREE5, seed=seed)


BUILDERS = {
    "single_edge": single_edge,
    "path3": path3,
    "triangle": triangle_ones,
    "ising_triangle": ising_triangle,
    "k4_seed42": lambda: k4(2, 42),
    "tree5_seed3": lambda: tree5(2, 3),
    "tree5_q3_seed3": lambda: tree5(3, 3),
    "triangle_q3_seed11": lambda: triangle(3, 11),
    "k4_q3_seed7": lambda: k4(3, 7),
    "triangle_q4_seed13": lambda: triangle(4, 13),
}

BINARY = ["single_edge", "path3", "triangle", "ising_triangle", "k4_seed42", "tree5_seed3"]
TREES = ["single_edge", "path3", "tree5_seed3", "tree5_q3_seed3"]


def names():
    return list(BUILDERS)


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.json")


def load(name: str) -> ModelSpec:
    """Load a bundled fixture from its JSON file."""
    return parse_model(path(name).read_text(encoding="utf-8"))


def random_model(seed: int, q_choices=(2, 3), max_edges=8, n_vertices=(3, 6)) -> ModelSpec:
    """Random connected-ish graph with uniform(0.5, 1.5) tables."""
    rng = np.random.default_rng(seed)
    q = int(rng.choice(q_choices))
    n = int(rng.integers(n_vertices[0], n_vertices[1] + 1))
    verts = [f"v{i}" for i in range(n)]
    edges = {edge_key(verts[i], verts[int(rng.integers(0, i))]) for i in range(1, n)}
    pairs = [edge_key(u, v) for u, v in itertools.combinations(verts, 2)]
    rng.shuffle(pairs)
    for p in pairs:
        if len(edges) >= max_edges:
            break
        if rng.random() < 0.5:
            edges.add(p)
    return from_edges(q, sorted(edges), vertices=verts,
                      seed=int(rng.integers(0, 2 ** 31)))


__all__ = ["BUILDERS", "BINARY", "TREES", "load", "load_model", "path", "names",
           "from_edges", "random_model", "ising_pair_table"]
