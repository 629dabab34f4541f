"""Compiled hot kernels: SE kernel matrices and the fused LOO objective.

Mirrors ``_fallback.py``; LAPACK is reached through scipy's Cython bindings
so small problems avoid any Python-level overhead.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, M_PI, INFINITY
from libc.string cimport memcpy
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs, dpotri

cnp.import_array()

JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6)
cdef double[4] _LADDER = [0.0, 1e-10, 1e-8, 1e-6]


cdef void _gram(const double[:, ::1] X, double scale, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, j, k
    cdef double s, t, v
    for i in range(n):
        out[i, i] = 1.0
        for j in range(i):
            s = 0.0
            for k in range(d):
                t = X[i, k] - X[j, k]
                s += t * t
            v = exp(-s * scale)
            out[i, j] = v
            out[j, i] = v


cdef void _cross(const double[:, ::1] X1, const double[:, ::1] X2, double scale,
                 double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n1 = X1.shape[0], n2 = X2.shape[0], d = X1.shape[1], i, j, k
    cdef double s, t
    for i in range(n1):
        for j in range(n2):
            s = 0.0
            for k in range(d):
                t = X1[i, k] - X2[j, k]
                s += t * t
            out[i, j] = exp(-s * scale)


def se_kernel_matrix(const double[:, ::1] X1, X2, double lengthscale):
    cdef double scale = 0.5 / (lengthscale * lengthscale)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out
    cdef const double[:, ::1] X2v
    if X2 is None:
        out = np.empty((X1.shape[0], X1.shape[0]))
        _gram(X1, scale, out)
        return out
    X2v = X2
    out = np.empty((X1.shape[0], X2v.shape[0]))
    _cross(X1, X2v, scale, out)
    return out


cdef double _loo(const double[:, ::1] X, const double[::1] y,
                 const double[::1] noise_weights, int r, double lengthscale,
                 double noise_std, double[:, ::1] C, double[:, ::1] A,
                 double[::1] alpha) noexcept nogil:
    cdef int n = <int>X.shape[0]
    cdef int one = 1, info = 1, off = n - r, i, attempt
    cdef double noise2 = noise_std * noise_std, trace = 0.0, scale, di, ai, total = 0.0
    cdef char lower = b'L'
    _gram(X, 0.5 / (lengthscale * lengthscale), C)
    for i in range(n):
        C[i, i] += noise2 * noise_weights[i]
        trace += C[i, i]
    scale = trace / n
    for attempt in range(4):
        memcpy(&A[0, 0], &C[0, 0], n * n * sizeof(double))
        if _LADDER[attempt] > 0.0:
            for i in range(n):
                A[i, i] += _LADDER[attempt] * scale
        # row-major storage of a symmetric matrix is its own column-major form
        dpotrf(&lower, &n, &A[0, 0], &n, &info)
        if info == 0:
            break
    if info != 0:
        return -INFINITY
    for i in range(n):
        alpha[i] = y[i]
    dpotrs(&lower, &n, &one, &A[0, 0], &n, &alpha[0], &n, &info)
    dpotri(&lower, &r, &A[off, off], &n, &info)
    if info != 0:
        return -INFINITY
    for i in range(off, n):
        di = A[i, i]
        if di <= 0.0:
            return -INFINITY
        ai = alpha[i]
        total += -0.5 * (log(2.0 * M_PI) - log(di)) - 0.5 * ai * ai / di
    return total


def loo_objective(const double[:, ::1] X, const double[::1] y,
                  const double[::1] noise_weights, Py_ssize_t n_scored,
                  double lengthscale, double noise_std):
    cdef Py_ssize_t n = X.shape[0]
    cdef double[:, ::1] C = np.empty((n, n))
    cdef double[:, ::1] A = np.empty((n, n))
    cdef double[::1] alpha = np.empty(n)
    cdef double value
    with nogil:
        value = _loo(X, y, noise_weights, <int>n_scored, lengthscale, noise_std, C, A, alpha)
    return value
