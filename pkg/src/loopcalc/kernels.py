"""Backend selection for the enumeration kernels.

The compiled extension is used when importable.  Set ``LOOPCALC_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("LOOPCALC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        pass


def pack(model):
    """Flatten a model into the arrays the kernels consume."""
    q = model.q
    vpos = {a: i for i, a in enumerate(model.vertices)}
    sizes = [model.tables[a].size for a in model.vertices]
    off = np.zeros(len(sizes), dtype=np.int64)
    if sizes:
        off[1:] = np.cumsum(sizes)[:-1]
    tab = (np.concatenate([model.tables[a] for a in model.vertices])
           if sizes else np.zeros(0))
    ne = len(model.edges)
    ends = np.zeros((ne, 2), dtype=np.int64)
    strides = np.zeros((ne, 2), dtype=np.int64)
    for i, (u, v) in enumerate(model.edges):
        for side, (a, b) in enumerate(((u, v), (v, u))):
            nbrs = model.neighbors(a)
            k = nbrs.index(b)
            ends[i, side] = vpos[a]
            strides[i, side] = q ** (len(nbrs) - 1 - k)
    return (np.int64(q), np.ascontiguousarray(tab, dtype=np.float64), off, ends, strides)


def partition_sum(model, impl=None):
    return float((impl or _impl).partition_sum(*pack(model)))


def config_weights(model, impl=None):
    return np.asarray((impl or _impl).config_weights(*pack(model)))


def marginal_sums(model, impl=None):
    """Return ``(z, edge_sums, vertex_sums)``; vertex sums keyed by vertex."""
    packed = pack(model)
    z, eacc, vacc = (impl or _impl).marginal_sums(*packed)
    off = packed[2]
    vert = {}
    for i, a in enumerate(model.vertices):
        size = model.tables[a].size
        vert[a] = np.asarray(vacc[off[i]:off[i] + size])
    edge = {e: np.asarray(eacc[i]) for i, e in enumerate(model.edges)}
    return float(z), edge, vert
