# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: gray-code point generation and the discrepancy pair sum."""

import math

import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.stdint cimport int64_t, uint64_t


cdef inline int _tz2(uint64_t i) nogil:
    cdef int k = 0
    while (i & 1) == 0:
        i >>= 1
        k += 1
    return k


def gray_points_b2(cols, state0, Py_ssize_t start, Py_ssize_t n, int K):
    cdef uint64_t[:, ::1] c = np.ascontiguousarray(cols, dtype=np.uint64)
    cdef Py_ssize_t s = c.shape[0]
    nums_arr = np.empty((n, s), dtype=np.uint64)
    pts_arr = np.empty((n, s), dtype=np.float64)
    cdef uint64_t[:, ::1] nums = nums_arr
    cdef double[:, ::1] pts = pts_arr
    cdef uint64_t[::1] st = np.array(state0, dtype=np.uint64)
    cdef double scale = 2.0 ** -K
    cdef Py_ssize_t i, j
    cdef int col
    cdef long long ops = 0
    with nogil:
        for j in range(s):
            nums[0, j] = st[j]
            pts[0, j] = <double>st[j] * scale
        for i in range(1, n):
            col = _tz2(<uint64_t>(start + i))
            for j in range(s):
                st[j] ^= c[j, col]
                nums[i, j] = st[j]
                pts[i, j] = <double>st[j] * scale
            ops += s * K
    return pts_arr, nums_arr, ops


def gray_points(ct, state0, int b, Py_ssize_t start, Py_ssize_t n):
    cdef int64_t[:, :, ::1] c = np.ascontiguousarray(ct, dtype=np.int64)
    cdef Py_ssize_t s = c.shape[0]
    cdef Py_ssize_t K = c.shape[1]
    cdef int64_t[:, ::1] st = np.array(state0, dtype=np.int64) % b
    nums_arr = np.empty((n, s), dtype=np.int64)
    pts_arr = np.empty((n, s), dtype=np.float64)
    cdef int64_t[:, ::1] nums = nums_arr
    cdef double[:, ::1] pts = pts_arr
    cdef double denom = float(b) ** K
    cdef Py_ssize_t i, j, k
    cdef int64_t v, q, d, acc
    cdef int col
    cdef long long ops = 0
    with nogil:
        for i in range(n):
            if i > 0:
                col = 0
                q = start + i
                while q % b == 0:
                    q = q // b
                    col += 1
            for j in range(s):
                acc = 0
                for k in range(K):
                    if i > 0:
                        d = st[j, k] - c[j, k, col]
                        if d < 0:
                            d += b
                        st[j, k] = d
                        ops += 1
                    acc = acc * b + st[j, k]
                nums[i, j] = acc
                pts[i, j] = <double>acc / denom
    return pts_arr, nums_arr, ops


cdef double _row_sum(const double[:, ::1] x, const double[:, ::1] B1,
                     const double[:, ::1] B2, Py_ssize_t i, int alpha,
                     double gam) noexcept nogil:
    # sum over j of prod_r(1 + gam*g_r) - 1, diagonal once and j > i twice,
    # with Kahan-compensated accumulation
    cdef Py_ssize_t N = x.shape[0]
    cdef Py_ssize_t s = x.shape[1]
    cdef Py_ssize_t j, r
    cdef double total = 0.0, comp = 0.0, y, t
    cdef double p, g, d, d2, w
    for j in range(i, N):
        p = 0.0
        for r in range(s):
            d = x[i, r] - x[j, r]
            if d < 0.0:
                d += 1.0
            g = B1[i, r] * B1[j, r]
            if alpha == 1:
                g += 0.5 * (d * d - d + 1.0 / 6.0)
            else:
                d2 = d * d
                g += 0.25 * B2[i, r] * B2[j, r]
                g -= (d2 * d2 - 2.0 * d2 * d + d2 - 1.0 / 30.0) / 24.0
            p += gam * g * (1.0 + p)
        w = p if j == i else 2.0 * p
        y = w - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def pair_sums(x, int alpha, gammas, int threads=0):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t N = xv.shape[0]
    xa = np.asarray(xv)
    cdef double[:, ::1] B1 = np.ascontiguousarray(xa - 0.5)
    cdef double[:, ::1] B2 = np.ascontiguousarray(xa * xa - xa + 1.0 / 6.0)
    gam_arr = np.atleast_1d(np.asarray(gammas, dtype=np.float64))
    rows_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] rows = rows_arr
    cdef Py_ssize_t i
    cdef double gam
    cdef int nthreads = threads if threads > 0 else 1
    out = np.empty(gam_arr.shape[0])
    for t in range(gam_arr.shape[0]):
        gam = gam_arr[t]
        for i in prange(N, nogil=True, schedule="dynamic", num_threads=nthreads):
            rows[i] = _row_sum(xv, B1, B2, i, alpha, gam)
        out[t] = math.fsum(rows_arr)
    return out
