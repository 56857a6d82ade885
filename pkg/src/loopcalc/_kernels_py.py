"""Pure numpy fallback for the enumeration kernels.

Same signatures and canonical order as the compiled module.  Configurations
are processed in chunks; the running sum is carried through ``np.cumsum`` so
the summation is sequential and bit-identical to the compiled loop.
"""
import numpy as np

CHUNK = 1 << 16


def _chunks(q, ne):
    n = q ** ne
    for start in range(0, n, CHUNK):
        yield np.arange(start, min(n, start + CHUNK), dtype=np.int64)


def _local_indices(idx, q, off, ends, strides):
    ne = ends.shape[0]
    lidx = np.zeros((off.shape[0], idx.shape[0]), dtype=np.int64)
    digits = np.empty((ne, idx.shape[0]), dtype=np.int64)
    rest = idx.copy()
    for e in range(ne - 1, -1, -1):
        rest, digits[e] = np.divmod(rest, q)
        lidx[ends[e, 0]] += digits[e] * strides[e, 0]
        lidx[ends[e, 1]] += digits[e] * strides[e, 1]
    return digits, lidx


def _weights(tab, off, lidx):
    w = np.ones(lidx.shape[1])
    for v in range(off.shape[0]):
        w *= tab[off[v] + lidx[v]]
    return w


def partition_sum(q, tab, off, ends, strides):
    z = 0.0
    for idx in _chunks(q, ends.shape[0]):
        _, lidx = _local_indices(idx, q, off, ends, strides)
        w = _weights(tab, off, lidx)
        z = float(np.cumsum(np.concatenate(([z], w)))[-1])
    return z


def config_weights(q, tab, off, ends, strides):
    parts = []
    for idx in _chunks(q, ends.shape[0]):
        _, lidx = _local_indices(idx, q, off, ends, strides)
        parts.append(_weights(tab, off, lidx))
    return np.concatenate(parts)


def marginal_sums(q, tab, off, ends, strides):
    ne = ends.shape[0]
    z = 0.0
    eacc = np.zeros((ne, q))
    vacc = np.zeros(tab.shape[0])
    for idx in _chunks(q, ne):
        digits, lidx = _local_indices(idx, q, off, ends, strides)
        w = _weights(tab, off, lidx)
        z = float(np.cumsum(np.concatenate(([z], w)))[-1])
        for e in range(ne):
            eacc[e] += np.bincount(digits[e], weights=w, minlength=q)
        for v in range(off.shape[0]):
            vacc += np.bincount(off[v] + lidx[v], weights=w, minlength=tab.shape[0])
    return z, eacc, vacc
