# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels.

All kernels walk configurations in canonical order (last edge fastest) with
an odometer that updates per-vertex local indices incrementally.  Sums are
plain sequential accumulations in that order.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _weight(const double[::1] tab, const cnp.int64_t[::1] off,
                           cnp.int64_t[::1] lidx, Py_ssize_t nv) nogil:
    cdef double w = 1.0
    cdef Py_ssize_t v
    for v in range(nv):
        w *= tab[off[v] + lidx[v]]
    return w


cdef inline bint _advance(cnp.int64_t[::1] digits, cnp.int64_t[::1] lidx,
                          const cnp.int64_t[:, ::1] ends,
                          const cnp.int64_t[:, ::1] strides,
                          Py_ssize_t ne, cnp.int64_t q) nogil:
    cdef Py_ssize_t e = ne - 1
    while e >= 0:
        if digits[e] < q - 1:
            digits[e] += 1
            lidx[ends[e, 0]] += strides[e, 0]
            lidx[ends[e, 1]] += strides[e, 1]
            return True
        lidx[ends[e, 0]] -= (q - 1) * strides[e, 0]
        lidx[ends[e, 1]] -= (q - 1) * strides[e, 1]
        digits[e] = 0
        e -= 1
    return False


def partition_sum(cnp.int64_t q, const double[::1] tab, const cnp.int64_t[::1] off,
                  const cnp.int64_t[:, ::1] ends, const cnp.int64_t[:, ::1] strides):
    cdef Py_ssize_t nv = off.shape[0]
    cdef Py_ssize_t ne = ends.shape[0]
    cdef cnp.int64_t[::1] digits = np.zeros(ne, dtype=np.int64)
    cdef cnp.int64_t[::1] lidx = np.zeros(nv, dtype=np.int64)
    cdef double z = 0.0
    with nogil:
        while True:
            z += _weight(tab, off, lidx, nv)
            if not _advance(digits, lidx, ends, strides, ne, q):
                break
    return z


def config_weights(cnp.int64_t q, const double[::1] tab, const cnp.int64_t[::1] off,
                   const cnp.int64_t[:, ::1] ends, const cnp.int64_t[:, ::1] strides):
    cdef Py_ssize_t nv = off.shape[0]
    cdef Py_ssize_t ne = ends.shape[0]
    cdef Py_ssize_t n = q ** ne
    cdef cnp.int64_t[::1] digits = np.zeros(ne, dtype=np.int64)
    cdef cnp.int64_t[::1] lidx = np.zeros(nv, dtype=np.int64)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] w = out
    cdef Py_ssize_t i = 0
    with nogil:
        while True:
            w[i] = _weight(tab, off, lidx, nv)
            i += 1
            if not _advance(digits, lidx, ends, strides, ne, q):
                break
    return out


def marginal_sums(cnp.int64_t q, const double[::1] tab, const cnp.int64_t[::1] off,
                  const cnp.int64_t[:, ::1] ends, const cnp.int64_t[:, ::1] strides):
    cdef Py_ssize_t nv = off.shape[0]
    cdef Py_ssize_t ne = ends.shape[0]
    cdef cnp.int64_t[::1] digits = np.zeros(ne, dtype=np.int64)
    cdef cnp.int64_t[::1] lidx = np.zeros(nv, dtype=np.int64)
    edge_np = np.zeros((ne, q), dtype=np.float64)
    vert_np = np.zeros(tab.shape[0], dtype=np.float64)
    cdef double[:, ::1] eacc = edge_np
    cdef double[::1] vacc = vert_np
    cdef double z = 0.0, w
    cdef Py_ssize_t e, v
    with nogil:
        while True:
            w = _weight(tab, off, lidx, nv)
            z += w
            for e in range(ne):
                eacc[e, digits[e]] += w
            for v in range(nv):
                vacc[off[v] + lidx[v]] += w
            if not _advance(digits, lidx, ends, strides, ne, q):
                break
    return z, edge_np, vert_np
