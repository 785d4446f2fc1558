# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled exact MVA lattice kernel (hot loop of the exact solver).

Mirrors the semantics of `_mva_fallback.mva_lattice`; the test suite asserts
both kernels agree to 1e-12.
"""

import numpy as np


def mva_lattice(demand, think, population):
    """Exact multi-class MVA; see `_mva_fallback.mva_lattice` for the contract."""
    cdef double[:, ::1] D = np.ascontiguousarray(demand, dtype=np.float64)
    cdef double[::1] Z = np.ascontiguousarray(think, dtype=np.float64)
    cdef long[::1] N = np.ascontiguousarray(population, dtype=np.int64)

    cdef Py_ssize_t K = D.shape[0]
    cdef Py_ssize_t C = D.shape[1]
    if C == 0:
        return np.zeros(0), np.zeros((K, 0))

    cdef Py_ssize_t implicit = 0, c, k, j
    for c in range(C):
        if N[c] > N[implicit]:
            implicit = c

    # Strides for the flat index over explicit classes (implicit excluded).
    cdef long[::1] stride = np.zeros(C, dtype=np.int64)
    cdef long plane = 1
    for c in range(C - 1, -1, -1):
        if c == implicit:
            continue
        stride[c] = plane
        plane *= N[c] + 1

    cdef long[::1] dim_of = np.zeros(C, dtype=np.int64)
    for c in range(C):
        dim_of[c] = N[c] + 1

    cdef long total = 0, final_flat = 0
    for c in range(C):
        total += N[c]
        if c != implicit:
            final_flat += N[c] * stride[c]

    q_prev_arr = np.zeros((plane, K))
    q_cur_arr = np.zeros((plane, K))
    cdef double[:, ::1] q_prev = q_prev_arr
    cdef double[:, ::1] q_cur = q_cur_arr
    cdef double[:, ::1] tmp

    x_final_arr = np.zeros(C)
    r_final_arr = np.zeros((K, C))
    cdef double[::1] x_final = x_final_arr
    cdef double[:, ::1] r_final = r_final_arr

    cdef double[::1] resid = np.zeros(K)
    cdef long t, flat, rem, s, n_c, n_implicit, prev_flat
    cdef double denom, x, r

    for t in range(1, total + 1):
        tmp = q_prev
        q_prev = q_cur
        q_cur = tmp
        for flat in range(plane):
            n_implicit = t
            rem = flat
            for c in range(C):
                if c == implicit:
                    continue
                n_implicit -= (rem // stride[c]) % dim_of[c]
            for k in range(K):
                q_cur[flat, k] = 0.0
            if n_implicit < 0 or n_implicit > N[implicit]:
                continue
            for c in range(C):
                if c == implicit:
                    n_c = n_implicit
                    prev_flat = flat
                else:
                    n_c = (flat // stride[c]) % dim_of[c]
                    prev_flat = flat - stride[c]
                if n_c <= 0:
                    continue
                denom = Z[c]
                for k in range(K):
                    r = D[k, c] * (1.0 + q_prev[prev_flat, k])
                    resid[k] = r
                    denom += r
                x = n_c / denom
                for k in range(K):
                    q_cur[flat, k] += x * resid[k]
                if t == total and flat == final_flat:
                    x_final[c] = x
                    for k in range(K):
                        r_final[k, c] = resid[k]

    return x_final_arr, r_final_arr
