# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernels for the structure-search hot loop."""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

BACKEND = "cython"


def contingency(child, parents, parent_arities, child_arity):
    """Count table of shape (prod(parent_arities), child_arity).

    Same contract as the numpy fallback: row-major parent coding with the
    first parent most significant.
    """
    cdef cnp.int64_t[::1] child_v = np.ascontiguousarray(child, dtype=np.int64)
    cdef Py_ssize_t n = child_v.shape[0]
    cdef Py_ssize_t n_par = len(parents)
    cdef Py_ssize_t r = child_arity

    cdef cnp.int64_t q = 1
    cdef Py_ssize_t p
    for p in range(n_par):
        q *= <cnp.int64_t> parent_arities[p]

    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.zeros((q, r), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out_v = out

    cdef cnp.int64_t[::1] code = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] col
    cdef cnp.int64_t a
    cdef Py_ssize_t i
    for p in range(n_par):
        col = np.ascontiguousarray(parents[p], dtype=np.int64)
        a = <cnp.int64_t> parent_arities[p]
        for i in range(n):
            code[i] = code[i] * a + col[i]

    for i in range(n):
        out_v[code[i], child_v[i]] += 1
    return out


def loglik(counts):
    """sum over cells of N_jk * (ln N_jk - ln N_j), with 0 * ln 0 = 0."""
    cdef cnp.int64_t[:, ::1] c = np.ascontiguousarray(counts, dtype=np.int64)
    cdef Py_ssize_t q = c.shape[0]
    cdef Py_ssize_t r = c.shape[1]
    cdef double total = 0.0
    cdef double row_sum, cell
    cdef Py_ssize_t j, k
    for j in range(q):
        row_sum = 0.0
        for k in range(r):
            row_sum += c[j, k]
        if row_sum == 0.0:
            continue
        for k in range(r):
            cell = c[j, k]
            if cell > 0.0:
                total += cell * (log(cell) - log(row_sum))
    return total
