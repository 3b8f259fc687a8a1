# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled feature and Gram kernels.

Mirrors :mod:`finrank_krr._fallback` function for function; outputs agree to
rounding. Feature arrays are laid out as (rank, n_points), matching the
``Psi`` convention used everywhere else in the package.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()

DEF SQRT2 = 1.4142135623730951


def fourier_features(const double[::1] theta, const long[::1] freqs,
                     const int[::1] kinds):
    """Orthonormal Fourier features on the uniform circle.

    ``kinds[j]`` is 0 for the constant mode, 1 for sqrt(2) cos and 2 for
    sqrt(2) sin of frequency ``freqs[j]``.
    """
    cdef Py_ssize_t m = freqs.shape[0]
    cdef Py_ssize_t n = theta.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, n))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t j, i
    cdef double f
    for j in range(m):
        f = <double>freqs[j]
        if kinds[j] == 0:
            for i in range(n):
                o[j, i] = 1.0
        elif kinds[j] == 1:
            for i in range(n):
                o[j, i] = SQRT2 * cos(f * theta[i])
        else:
            for i in range(n):
                o[j, i] = SQRT2 * sin(f * theta[i])
    return out


def legendre_features(const double[::1] x, Py_ssize_t n_degrees):
    """sqrt(2k+1) P_k(x) for k < n_degrees via the three-term recurrence."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n_degrees, n))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, k
    cdef double p_prev, p_cur, p_next, xi
    for i in range(n):
        xi = x[i]
        p_prev = 1.0
        p_cur = xi
        if n_degrees > 0:
            o[0, i] = 1.0
        if n_degrees > 1:
            o[1, i] = sqrt(3.0) * xi
        for k in range(1, n_degrees - 1):
            p_next = ((2 * k + 1) * xi * p_cur - k * p_prev) / (k + 1)
            o[k + 1, i] = sqrt(2.0 * (k + 1) + 1.0) * p_next
            p_prev = p_cur
            p_cur = p_next
    return out


def mercer_gram(const double[:, ::1] feats_a, const double[:, ::1] feats_b,
                const double[::1] eigenvalues):
    """Entrywise Mercer sum K[i, j] = sum_k lam_k psi_k(a_i) psi_k(b_j)."""
    cdef Py_ssize_t m = eigenvalues.shape[0]
    cdef Py_ssize_t na = feats_a.shape[1]
    cdef Py_ssize_t nb = feats_b.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((na, nb))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for k in range(m):
                acc += eigenvalues[k] * feats_a[k, i] * feats_b[k, j]
            o[i, j] = acc
    return out
