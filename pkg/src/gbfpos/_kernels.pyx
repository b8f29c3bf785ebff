# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Koszul sign kernel.

Same contract as :func:`gbfpos._kernels_py.koszul_parity`.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def koszul_parity(cnp.int64_t[::1] dims,
                  cnp.uint8_t[::1] fdeg_flat,
                  cnp.int64_t[::1] offsets,
                  cnp.int64_t[:, ::1] pairs):
    cdef Py_ssize_t k = dims.shape[0]
    cdef Py_ssize_t npairs = pairs.shape[0]
    cdef Py_ssize_t total = 1
    cdef Py_ssize_t s, p, flat, rem
    for s in range(k):
        total *= dims[s]
    out = np.zeros(total, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out_v = out
    if npairs == 0 or total == 0:
        return out
    digits_arr = np.zeros(k, dtype=np.int64)
    cdef cnp.int64_t[::1] digits = digits_arr
    cdef cnp.uint8_t par
    for flat in range(total):
        rem = flat
        for s in range(k - 1, -1, -1):
            digits[s] = rem % dims[s]
            rem = rem // dims[s]
        par = 0
        for p in range(npairs):
            par ^= (fdeg_flat[offsets[pairs[p, 0]] + digits[pairs[p, 0]]]
                    & fdeg_flat[offsets[pairs[p, 1]] + digits[pairs[p, 1]]])
        out_v[flat] = par
    return out
