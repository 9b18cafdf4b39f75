# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coefficient kernels.

Mirrors ``pqlocal._kernels_py`` function for function; see that module for
the index conventions.  Matrices are small (N is the pair dimension), so
the matrix products are hand-rolled triple loops over memoryviews.
"""

import numpy as np

ctypedef double complex cplx


cdef inline void _mm_acc(const cplx[:, :] a, const cplx[:, :] b, cplx[:, :] out,
                         double sign, Py_ssize_t n) noexcept:
    # out += sign * (a @ b)
    cdef Py_ssize_t i, j, k
    cdef cplx s
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s = s + a[i, k] * b[k, j]
            out[i, j] = out[i, j] + sign * s


def conv_stacks(const cplx[:, :, ::1] a, const cplx[:, :, ::1] b, Py_ssize_t nout):
    cdef Py_ssize_t la = a.shape[0], lb = b.shape[0], n = a.shape[1]
    cdef Py_ssize_t i, j
    out_arr = np.zeros((nout, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    for i in range(min(la, nout)):
        for j in range(min(lb, nout - i)):
            _mm_acc(a[i], b[j], out[i + j], 1.0, n)
    return out_arr


def lower_recurrence(const cplx[:, :, ::1] s, const cplx[:, :, ::1] c):
    cdef Py_ssize_t nr = s.shape[0], n = s.shape[1]
    cdef Py_ssize_t t, u, a, b
    out_arr = np.zeros((nr, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    for t in range(nr):
        for a in range(n):
            for b in range(n):
                out[t, a, b] = s[t, a, b]
        for u in range(t):
            _mm_acc(s[u], c[t - u - 1], out[t], 1.0, n)
            _mm_acc(c[t - u - 1], out[u], out[t], -1.0, n)
    return out_arr


def lower_recurrence_dir(const cplx[:, :, ::1] s, const cplx[:, :, ::1] c,
                         const cplx[:, :, ::1] dc, const cplx[:, :, ::1] r):
    cdef Py_ssize_t nr = s.shape[0], n = s.shape[1]
    cdef Py_ssize_t t, u
    out_arr = np.zeros((nr, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    for t in range(nr):
        for u in range(t):
            _mm_acc(s[u], dc[t - u - 1], out[t], 1.0, n)
            _mm_acc(dc[t - u - 1], r[u], out[t], -1.0, n)
            _mm_acc(c[t - u - 1], out[u], out[t], -1.0, n)
    return out_arr


def residual_f(const cplx[:, :, ::1] c, const cplx[:, :, ::1] om, const cplx[:, :, ::1] q):
    cdef Py_ssize_t M = c.shape[0], n_dim = c.shape[1]
    cdef Py_ssize_t K = om.shape[0], lq = q.shape[0]
    cdef Py_ssize_t n = -K
    cdef Py_ssize_t t, i, j, k, a, b
    eye_arr = np.eye(n_dim, dtype=np.complex128)
    cdef const cplx[:, ::1] eye = eye_arr
    out_arr = np.zeros((M + K, n_dim, n_dim), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr

    for t in range(M + K):
        i = n + t
        k = i + 1
        if k != 0 and 1 <= k <= M:
            for a in range(n_dim):
                for b in range(n_dim):
                    out[t, a, b] = out[t, a, b] + (<double> k) * c[k - 1, a, b]
        for j in range(n, 0):
            k = i - j
            if k == 0:
                _mm_acc(eye, om[j - n], out[t], 1.0, n_dim)
            elif 1 <= k <= M:
                _mm_acc(c[k - 1], om[j - n], out[t], 1.0, n_dim)
        for j in range(n, min(i, n + lq - 1) + 1):
            k = i - j
            if k == 0:
                _mm_acc(q[j - n], eye, out[t], -1.0, n_dim)
            elif 1 <= k <= M:
                _mm_acc(q[j - n], c[k - 1], out[t], -1.0, n_dim)
    return out_arr


def residual_f_dir(const cplx[:, :, ::1] c, const cplx[:, :, ::1] dc,
                   const cplx[:, :, ::1] om, const cplx[:, :, ::1] dom,
                   const cplx[:, :, ::1] q):
    cdef Py_ssize_t M = c.shape[0], n_dim = c.shape[1]
    cdef Py_ssize_t K = om.shape[0], lq = q.shape[0]
    cdef Py_ssize_t n = -K
    cdef Py_ssize_t t, i, j, k, a, b
    eye_arr = np.eye(n_dim, dtype=np.complex128)
    cdef const cplx[:, ::1] eye = eye_arr
    out_arr = np.zeros((M + K, n_dim, n_dim), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr

    for t in range(M + K):
        i = n + t
        k = i + 1
        if k != 0 and 1 <= k <= M:
            for a in range(n_dim):
                for b in range(n_dim):
                    out[t, a, b] = out[t, a, b] + (<double> k) * dc[k - 1, a, b]
        for j in range(n, 0):
            k = i - j
            if 1 <= k <= M:
                _mm_acc(dc[k - 1], om[j - n], out[t], 1.0, n_dim)
            if k == 0:
                _mm_acc(eye, dom[j - n], out[t], 1.0, n_dim)
            elif 1 <= k <= M:
                _mm_acc(c[k - 1], dom[j - n], out[t], 1.0, n_dim)
        for j in range(n, min(i, n + lq - 1) + 1):
            k = i - j
            if 1 <= k <= M:
                _mm_acc(q[j - n], dc[k - 1], out[t], -1.0, n_dim)
    return out_arr


def c_rhs_irregular(const cplx[:, :, ::1] p, Py_ssize_t m,
                    const cplx[:, :, ::1] c, const cplx[:, :, ::1] phi):
    cdef Py_ssize_t mm1 = c.shape[0], n = c.shape[1]
    cdef Py_ssize_t M = mm1 - 1, lp = p.shape[0]
    cdef Py_ssize_t i, j, k
    out_arr = np.zeros((mm1, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    for i in range(mm1):
        for j in range(m, min(i, m + lp - 1) + 1):
            k = i - j
            if 0 <= k <= M:
                _mm_acc(p[j - m], c[k], out[i], 1.0, n)
        for j in range(m, 1):
            k = i - j
            if 0 <= k <= M:
                _mm_acc(c[k], phi[j - m], out[i], -1.0, n)
    return out_arr


def c_rhs_regular(const cplx[:, :, ::1] p, const cplx[:, :, :, ::1] c):
    cdef Py_ssize_t mm1 = c.shape[0], depth = c.shape[1], n = c.shape[2]
    cdef Py_ssize_t lp = p.shape[0]
    cdef Py_ssize_t i, j, k
    out_arr = np.zeros((mm1, depth, n, n), dtype=np.complex128)
    cdef cplx[:, :, :, ::1] out = out_arr
    for i in range(mm1):
        for j in range(depth):
            _mm_acc(p[0], c[i, j], out[i, j], 1.0, n)
            _mm_acc(c[i, j], p[0], out[i, j], -1.0, n)
            for k in range(1, min(i, lp - 1) + 1):
                _mm_acc(p[k], c[i - k, j], out[i, j], 1.0, n)
    return out_arr


def residual_log_stack(const cplx[:, :, :, ::1] c, const cplx[:, :, ::1] q):
    cdef Py_ssize_t mm1 = c.shape[0], depth = c.shape[1], n = c.shape[2]
    cdef Py_ssize_t M = mm1 - 1, lq = q.shape[0]
    cdef Py_ssize_t ip1, i, j, k, a, b
    out_arr = np.zeros((M, depth, n, n), dtype=np.complex128)
    cdef cplx[:, :, :, ::1] out = out_arr
    for ip1 in range(1, M + 1):
        i = ip1 - 1
        for j in range(depth):
            for a in range(n):
                for b in range(n):
                    out[ip1 - 1, j, a, b] = (<double> ip1) * c[ip1, j, a, b]
                    if j + 1 < depth:
                        out[ip1 - 1, j, a, b] = (
                            out[ip1 - 1, j, a, b]
                            + (<double> (j + 1)) * c[ip1, j + 1, a, b]
                        )
            _mm_acc(c[ip1, j], q[0], out[ip1 - 1, j], 1.0, n)
            _mm_acc(q[0], c[ip1, j], out[ip1 - 1, j], -1.0, n)
            for k in range(0, min(i, lq - 2) + 1):
                _mm_acc(q[k + 1], c[i - k, j], out[ip1 - 1, j], -1.0, n)
    return out_arr
