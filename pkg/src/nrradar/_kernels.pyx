# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF GOLD_OFFSET = 1600


cdef inline unsigned int _step28(unsigned int reg, bint is_x2):
    """Advance a 31-bit register (bit j = x(n+j)) by 28 positions."""
    cdef unsigned int new
    if is_x2:
        new = ((reg >> 3) ^ (reg >> 2) ^ (reg >> 1) ^ reg) & 0x0FFFFFFF
    else:
        new = ((reg >> 3) ^ reg) & 0x0FFFFFFF
    return (reg >> 28) | (new << 3)


def gold_batch(c_inits, Py_ssize_t length):
    cdef cnp.int64_t[::1] ci = np.ascontiguousarray(c_inits, dtype=np.int64)
    cdef Py_ssize_t n_seq = ci.shape[0]
    out = np.empty((n_seq, length), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef Py_ssize_t total = length + GOLD_OFFSET
    cdef Py_ssize_t i, n, j, pos
    cdef unsigned int x1, x2
    # x1 does not depend on c_init: generate its output bits once
    x1_bits = np.empty(length, dtype=np.uint8)
    cdef cnp.uint8_t[::1] a = x1_bits
    x1 = 1
    n = 0
    while n < total:
        for j in range(28):
            pos = n + j - GOLD_OFFSET
            if 0 <= pos < length:
                a[pos] = (x1 >> j) & 1
        x1 = _step28(x1, False)
        n += 28
    for i in range(n_seq):
        x2 = <unsigned int>(ci[i] & 0x7FFFFFFF)
        n = 0
        while n + 28 <= GOLD_OFFSET:
            x2 = _step28(x2, True)
            n += 28
        while n < total:
            for j in range(28):
                pos = n + j - GOLD_OFFSET
                if 0 <= pos < length:
                    o[i, pos] = a[pos] ^ ((x2 >> j) & 1)
            x2 = _step28(x2, True)
            n += 28
    return out


def sweep_power(double complex[:, :, :, ::1] s, double complex[:, :, :, ::1] noise,
                double complex[:, ::1] cc, double complex[:, :, ::1] ec,
                double complex[::1] tq, double complex[:, :, ::1] tt, double complex[:, ::1] eq,
                double beta2):
    cdef Py_ssize_t n_b = s.shape[0], n_r = s.shape[1], n_l = s.shape[2], n_m = s.shape[3]
    cdef Py_ssize_t n_c = cc.shape[1]
    cdef Py_ssize_t b, r, l, m, p
    cdef double complex c, x, y, h, acc, sv, tgt
    cdef double sumsq, inv_r = 1.0 / n_r
    out = np.zeros(n_b, dtype=np.float64)
    cdef double[::1] o = out
    for b in range(n_b):
        sumsq = 0.0
        for l in range(n_l):
            for m in range(n_m):
                c = 0
                for p in range(n_c):
                    c = c + cc[b, p] * ec[p, l, m]
                tgt = tq[b] * eq[l, m]
                acc = 0
                for r in range(n_r):
                    sv = s[b, r, l, m]
                    x = c + tgt * tt[b, r, l]
                    y = x * sv + noise[b, r, l, m]
                    h = (sv.real * y.real + sv.imag * y.imag
                         + 1j * (sv.real * y.imag - sv.imag * y.real)) / beta2
                    acc = acc + h
                    sumsq = sumsq + h.real * h.real + h.imag * h.imag
                sumsq = sumsq - (acc.real * acc.real + acc.imag * acc.imag) * inv_r
        o[b] = sumsq
    return out
