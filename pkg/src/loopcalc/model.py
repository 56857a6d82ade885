"""Forney-style graphical models: variables on edges, factors on vertices.

Each vertex ``a`` carries a dense factor table over the letters of all its
incident edges.  Neighbours are kept in ascending id order and the table is
stored flat, lexicographically, with the *last* neighbour varying fastest.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

MAX_TABLE_SIZE = 2 ** 20

Edge = tuple  # (u, v) with u < v


class ModelError(ValueError):
    """Raised when a model document or model object is invalid."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class Diagnostic(NamedTuple):
    severity: str
    location: str
    message: str

    def __str__(self):
        return f"{self.severity}: {self.location}: {self.message}"


def edge_key(u: str, v: str) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Graph topology plus one factor table per vertex.

    Construct through :func:`make_model` or :func:`parse_model`, which sort
    neighbour lists and run :func:`validate`.  The raw constructor performs no
    checks so that invalid objects can still be diagnosed.
    """

    q: int
    vertices: tuple
    adjacency: Mapping[str, tuple]
    tables: Mapping[str, np.ndarray]
    level: int = 0
    positivity_required: bool = True
    edges: tuple = field(init=False)

    def __post_init__(self):
        es = set()
        for a, nbrs in self.adjacency.items():
            for b in nbrs:
                if a != b:
                    es.add(edge_key(a, b))
        object.__setattr__(self, "edges", tuple(sorted(es)))

    def degree(self, a) -> int:
        return len(self.adjacency[a])

    def neighbors(self, a) -> tuple:
        return self.adjacency[a]

    def tensor(self, a) -> np.ndarray:
        """Table of ``a`` reshaped to one axis per neighbour."""
        return self.tables[a].reshape((self.q,) * self.degree(a))

    @property
    def edge_index(self) -> dict:
        return {e: i for i, e in enumerate(self.edges)}

    @property
    def n_configs(self) -> int:
        return self.q ** len(self.edges)

    def with_tables(self, tables: Mapping[str, np.ndarray], **kw) -> "ModelSpec":
        """Same graph, new tables (not validated)."""
        opts = dict(level=self.level, positivity_required=self.positivity_required)
        opts.update(kw)
        frozen = {a: _freeze(tables[a]) for a in self.vertices}
        return ModelSpec(self.q, self.vertices, self.adjacency, frozen, **opts)

    def is_positive(self) -> bool:
        return all(bool(np.all(self.tables[a] > 0)) for a in self.vertices)

    def __repr__(self):
        return (f"ModelSpec(q={self.q}, |V|={len(self.vertices)}, "
                f"|E|={len(self.edges)}, level={self.level})")


def _freeze(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.float64).reshape(-1)
    out.setflags(write=False)
    return out


def make_model(q: int, adjacency: Mapping[str, Iterable[str]],
               tables: Mapping[str, Sequence[float]], *, level: int = 0,
               positivity_required: bool | None = None,
               check: bool = True) -> ModelSpec:
    """Build a :class:`ModelSpec`, sorting neighbour lists.

    Tables must already be in canonical order, i.e. indexed by the *sorted*
    neighbour list.  Raises :class:`ModelError` when ``check`` is true and
    the model fails validation.
    """
    if positivity_required is None:
        positivity_required = level == 0
    vertices = tuple(sorted(adjacency))
    adj = {a: tuple(sorted(adjacency[a])) for a in vertices}
    tabs = {a: _freeze(tables[a]) for a in vertices}
    model = ModelSpec(int(q), vertices, adj, tabs, level=level,
                      positivity_required=positivity_required)
    if check:
        diags = validate(model)
        if diags:
            raise ModelError(f"invalid model: {diags[0]}", diags)
    return model


def validate(model: ModelSpec) -> list[Diagnostic]:
    """Return every invariant violation; an empty list means valid."""
    out = []
    q = model.q
    if not isinstance(q, (int, np.integer)) or q < 1:
        out.append(Diagnostic("error", "q", f"alphabet size must be an integer >= 1, got {q!r}"))
        return out
    vset = set(model.vertices)
    for a in model.vertices:
        nbrs = model.adjacency.get(a, ())
        loc = f"vertex {a}"
        if len(set(nbrs)) != len(nbrs):
            out.append(Diagnostic("error", loc, "parallel edge (neighbour listed twice)"))
        for b in nbrs:
            if b == a:
                out.append(Diagnostic("error", loc, "self-loop"))
            elif b not in vset:
                out.append(Diagnostic("error", loc, f"unknown neighbour {b!r}"))
            elif a not in model.adjacency.get(b, ()):
                out.append(Diagnostic("error", loc,
                                      f"asymmetric adjacency: {b!r} does not list {a!r}"))
        size = q ** len(nbrs)
        if size > MAX_TABLE_SIZE:
            out.append(Diagnostic("error", loc,
                                  f"table size q^degree = {size} exceeds {MAX_TABLE_SIZE}"))
            continue
        tab = model.tables.get(a)
        if tab is None:
            out.append(Diagnostic("error", loc, "missing table"))
            continue
        if tab.size != size:
            out.append(Diagnostic("error", loc,
                                  f"table has {tab.size} entries, expected q^degree = {size}"))
        if not np.all(np.isfinite(tab)):
            out.append(Diagnostic("error", loc, "non-finite table entry"))
        elif model.positivity_required and np.any(tab <= 0):
            k = int(np.flatnonzero(tab <= 0)[0])
            out.append(Diagnostic("error", f"{loc} entry {k}",
                                  f"non-positive entry {tab[k]!r} (positivity required)"))
    return out


def local_index(model: ModelSpec, vertex, sigma_a: Sequence[int]) -> int:
    """Rank of a local assignment; last (largest-id) neighbour varies fastest."""
    deg = model.degree(vertex)
    if len(sigma_a) != deg:
        raise ValueError(f"vertex {vertex!r} has degree {deg}, got {len(sigma_a)} letters")
    idx = 0
    for s in sigma_a:
        s = int(s)
        if not 0 <= s < model.q:
            raise ValueError(f"letter {s} out of range for q={model.q}")
        idx = idx * model.q + s
    return idx


def decode_local_index(model: ModelSpec, vertex, index: int) -> tuple:
    deg = model.degree(vertex)
    if not 0 <= index < model.q ** deg:
        raise ValueError(f"index {index} out of range")
    out = []
    for _ in range(deg):
        index, s = divmod(index, model.q)
        out.append(s)
    return tuple(reversed(out))


def restrict(model: ModelSpec, vertex, sigma: Mapping[Edge, int]) -> tuple:
    """Letters of ``sigma`` on the edges at ``vertex``, in canonical order."""
    return tuple(sigma[edge_key(vertex, b)] for b in model.neighbors(vertex))


def config_from_index(model: ModelSpec, index: int) -> dict:
    """Decode a global configuration index (last edge fastest)."""
    out = {}
    for e in reversed(model.edges):
        index, out[e] = divmod(index, model.q)
    return {e: out[e] for e in model.edges}


def config_index(model: ModelSpec, sigma: Mapping[Edge, int]) -> int:
    idx = 0
    for e in model.edges:
        idx = idx * model.q + int(sigma[e])
    return idx


# -- document format ---------------------------------------------------------

def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    return format(x, ".17g")


def _field_error(where: str, msg: str) -> ModelError:
    return ModelError(f"{where}: {msg}", [Diagnostic("error", where, msg)])


def parse_model(text: str, *, level: int = 0) -> ModelSpec:
    """Parse a JSON model document.

    Neighbour lists may come in any order; the table in the file is indexed by
    the neighbours *sorted by id*, last fastest.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                         [Diagnostic("error", f"line {exc.lineno}", exc.msg)]) from exc
    if not isinstance(doc, dict):
        raise _field_error("<root>", "expected an object")
    q = doc.get("q")
    if isinstance(q, bool) or not isinstance(q, int) or q < 1:
        raise _field_error("q", f"expected an integer >= 1, got {q!r}")
    verts = doc.get("vertices")
    if not isinstance(verts, list):
        raise _field_error("vertices", "expected an array")
    adjacency, tables = {}, {}
    for i, v in enumerate(verts):
        where = f"vertices[{i}]"
        if not isinstance(v, dict):
            raise _field_error(where, "expected an object")
        vid = v.get("id")
        if not isinstance(vid, str):
            raise _field_error(f"{where}.id", "expected a string")
        if vid in adjacency:
            raise _field_error(f"{where}.id", f"duplicate vertex id {vid!r}")
        nbrs = v.get("neighbors")
        if not isinstance(nbrs, list) or not all(isinstance(b, str) for b in nbrs):
            raise _field_error(f"{where}.neighbors", "expected an array of strings")
        table = v.get("table")
        if not isinstance(table, list) or not all(
                isinstance(t, (int, float)) and not isinstance(t, bool) for t in table):
            raise _field_error(f"{where}.table", "expected an array of numbers")
        adjacency[vid] = nbrs
        tables[vid] = [float(t) for t in table]
    return make_model(q, adjacency, tables, level=level)


def serialize_model(model: ModelSpec) -> str:
    lines = ["{", f'  "q": {model.q},', '  "vertices": [']
    for i, a in enumerate(model.vertices):
        nbrs = ", ".join(json.dumps(b) for b in model.neighbors(a))
        tab = ", ".join(format_float(t) for t in model.tables[a])
        sep = "," if i + 1 < len(model.vertices) else ""
        lines.append(f'    {{"id": {json.dumps(a)}, "neighbors": [{nbrs}], "table": [{tab}]}}{sep}')
    lines += ["  ]", "}", ""]
    return "\n".join(lines)


def load_model(path) -> ModelSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())
