# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled LLL and successive-conditioning kernels.

Same algorithms and return values as ``_kernels_py``; see there.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, isfinite

cnp.import_array()

DEF MAX_LLL_ITER = 10000


cdef void _gram_schmidt(long long[:, ::1] B, double[:, ::1] Q, int n,
                        double[:, ::1] G, double[:, ::1] mu, double[::1] bs) noexcept nogil:
    cdef int i, j, r, c, t
    cdef double s, acc
    for i in range(n):
        for j in range(i + 1):
            s = 0.0
            for r in range(n):
                if B[i, r] == 0:
                    continue
                acc = 0.0
                for c in range(n):
                    acc = acc + Q[r, c] * B[j, c]
                s = s + B[i, r] * acc
            G[i, j] = s
            G[j, i] = s
    for i in range(n):
        for j in range(i):
            s = G[i, j]
            for t in range(j):
                s = s - mu[j, t] * mu[i, t] * bs[t]
            mu[i, j] = s / bs[j]
        s = G[i, i]
        for t in range(i):
            s = s - mu[i, t] * mu[i, t] * bs[t]
        bs[i] = s


cdef long long _round_half_even(double x) noexcept nogil:
    cdef double f = floor(x)
    cdef double d = x - f
    if d > 0.5:
        return <long long>(f + 1.0)
    if d < 0.5:
        return <long long>f
    if (<long long>f) % 2 == 0:
        return <long long>f
    return <long long>(f + 1.0)


def lll_reduce_gram(Q, double delta=0.75):
    cdef double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef int n = Qv.shape[0]
    B_arr = np.eye(n, dtype=np.int64)
    cdef long long[:, ::1] B = B_arr
    cdef double[:, ::1] G = np.zeros((n, n))
    cdef double[:, ::1] mu = np.zeros((n, n))
    cdef double[::1] bs = np.zeros(n)
    cdef int k = 1, j, c, it = 0
    cdef long long q, tmp
    with nogil:
        while k < n:
            it += 1
            if it > MAX_LLL_ITER:
                break
            for j in range(k - 1, -1, -1):
                _gram_schmidt(B, Qv, n, G, mu, bs)
                q = _round_half_even(mu[k, j])
                if q != 0:
                    for c in range(n):
                        B[k, c] = B[k, c] - q * B[j, c]
            _gram_schmidt(B, Qv, n, G, mu, bs)
            if bs[k] >= (delta - mu[k, k - 1] * mu[k, k - 1]) * bs[k - 1]:
                k += 1
            else:
                for c in range(n):
                    tmp = B[k, c]
                    B[k, c] = B[k - 1, c]
                    B[k - 1, c] = tmp
                k = k - 1 if k > 1 else 1
    if it > MAX_LLL_ITER:
        raise RuntimeError("LLL did not converge")
    return B_arr


def successive_sigma2(F, A):
    Fk_arr = np.array(F, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] Fk = Fk_arr
    cdef long long[:, ::1] Av = np.ascontiguousarray(A, dtype=np.int64)
    cdef int n = Fk.shape[0], rows = Av.shape[0], k, r, c
    out_arr = np.zeros(rows)
    cdef double[::1] out = out_arr
    cdef double[::1] w = np.zeros(n)
    cdef double s, t
    with nogil:
        for k in range(rows):
            for c in range(n):
                s = 0.0
                for r in range(n):
                    s = s + Fk[r, c] * Av[k, r]
                w[c] = s
            s = 0.0
            for c in range(n):
                s = s + w[c] * w[c]
            out[k] = s
            if s <= 0.0 or not isfinite(s):
                continue
            for r in range(n):
                t = 0.0
                for c in range(n):
                    t = t + Fk[r, c] * w[c]
                t = t / s
                for c in range(n):
                    Fk[r, c] = Fk[r, c] - t * w[c]
    return out_arr
