# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the tree kernels in ``_pykernels``."""
import numpy as np
cimport cython
from libc.math cimport sqrt


def integrate(theta, delta):
    cdef const double[:, :, ::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[:, :, ::1] de = np.ascontiguousarray(delta, dtype=np.float64)
    cdef Py_ssize_t n_cells = de.shape[0], k = de.shape[1], m = de.shape[2]
    cdef Py_ssize_t n = th.shape[1]
    result = np.zeros((1 + k * n_cells, n))
    cdef double[:, ::1] out = result
    cdef Py_ssize_t c, b, i, j, child
    cdef double acc
    for c in range(n_cells):
        for b in range(k):
            child = k * c + 1 + b
            for i in range(n):
                acc = 0.0
                for j in range(m):
                    acc = acc + th[c, i, j] * de[c, b, j]
                out[child, i] = out[c, i] + acc
    return result


def child_average(values, probs):
    cdef const double[:, ::1] val = np.ascontiguousarray(
        np.asarray(values, dtype=np.float64).reshape(len(values), -1))
    cdef const double[:, ::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t n_cells = pr.shape[0], k = pr.shape[1], d = val.shape[1]
    result = np.zeros((n_cells, d))
    cdef double[:, ::1] out = result
    cdef Py_ssize_t c, b, i
    for c in range(n_cells):
        for b in range(k):
            for i in range(d):
                out[c, i] += pr[c, b] * val[k * c + 1 + b, i]
    return result


def backward_induction(values, probs, Py_ssize_t stop):
    arr = np.array(values, dtype=np.float64, copy=True)
    shape = arr.shape
    result = np.ascontiguousarray(arr.reshape(shape[0], -1))
    cdef double[:, ::1] out = result
    cdef const double[:, ::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t k = pr.shape[1], d = out.shape[1]
    cdef Py_ssize_t c, b, i
    cdef double acc
    for c in range(stop - 1, -1, -1):
        for i in range(d):
            acc = 0.0
            for b in range(k):
                acc = acc + pr[c, b] * out[k * c + 1 + b, i]
            out[c, i] = acc
    return result.reshape(shape)


def gram_schmidt(theta, double tol):
    cdef const double[:, :, ::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t n_cells = th.shape[0], n = th.shape[1], m = th.shape[2]
    result = np.zeros((n_cells, n, m))
    units_arr = np.zeros((n_cells, n, m))
    cdef double[:, :, ::1] out = result
    cdef double[:, :, ::1] units = units_arr
    cdef double[::1] v = np.zeros(m)
    cdef Py_ssize_t c, i, j, l, sweep
    cdef double scale, norm, dot
    for c in range(n_cells):
        scale = 0.0
        for i in range(n):
            norm = 0.0
            for l in range(m):
                norm = norm + th[c, i, l] * th[c, i, l]
            norm = sqrt(norm)
            if norm > scale:
                scale = norm
        for i in range(n):
            for l in range(m):
                v[l] = th[c, i, l]
            for sweep in range(2):
                # classical sweep against the already accepted directions
                for j in range(i):
                    dot = 0.0
                    for l in range(m):
                        dot = dot + v[l] * units[c, j, l]
                    if dot != 0.0:
                        for l in range(m):
                            v[l] = v[l] - dot * units[c, j, l]
            norm = 0.0
            for l in range(m):
                norm = norm + v[l] * v[l]
            norm = sqrt(norm)
            if norm > tol * scale and norm > 0.0:
                for l in range(m):
                    out[c, i, l] = v[l]
                    units[c, i, l] = v[l] / norm
    return result
