# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the spectral hot loops."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def reflected_block_sum(C, obs, src):
    """out[k, r, c] = sum_ab C[k, a, b] * obs[k, a, r] * src[k, b, c]."""
    cdef double complex[:, :, ::1] Cv = np.ascontiguousarray(C, dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = np.ascontiguousarray(obs, dtype=np.complex128)
    cdef double complex[:, :, ::1] sv = np.ascontiguousarray(src, dtype=np.complex128)
    cdef Py_ssize_t K = ov.shape[0], A = ov.shape[1], R = ov.shape[2]
    cdef Py_ssize_t B = sv.shape[1], Q = sv.shape[2]
    out = np.zeros((K, R, Q), dtype=np.complex128)
    cdef double complex[:, :, ::1] res = out
    cdef double complex[:, ::1] u = np.empty((B, R), dtype=np.complex128)
    cdef Py_ssize_t k, a, b, r, c
    cdef double complex acc, w
    with nogil:
        for k in range(K):
            for b in range(B):
                for r in range(R):
                    acc = 0
                    for a in range(A):
                        acc = acc + Cv[k, a, b] * ov[k, a, r]
                    u[b, r] = acc
            for r in range(R):
                for b in range(B):
                    w = u[b, r]
                    if w == 0:
                        continue
                    for c in range(Q):
                        res[k, r, c] = res[k, r, c] + w * sv[k, b, c]
    return out
