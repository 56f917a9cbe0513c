# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled objective and diversity kernels.

Mirrors :mod:`pmf._pykernels` function for function; see there for the
definitions. Kind codes: 0 sphere, 1 rastrigin, 2 rosenbrock, 3 ackley,
4 griewank, 5 zakharov.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, exp, sqrt, M_PI, M_E
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"


cdef double _base(int kind, const double* z, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, s2 = 0.0, p = 1.0, t, u
    if kind == 0:
        for i in range(d):
            s += z[i] * z[i]
        return s
    elif kind == 1:
        for i in range(d):
            s += z[i] * z[i] - 10.0 * cos(2.0 * M_PI * z[i])
        return 10.0 * d + s
    elif kind == 2:
        for i in range(d - 1):
            t = z[i + 1] - z[i] * z[i]
            u = 1.0 - z[i]
            s += 100.0 * t * t + u * u
        return s
    elif kind == 3:
        for i in range(d):
            s += z[i] * z[i]
            s2 += cos(2.0 * M_PI * z[i])
        return -20.0 * exp(-0.2 * sqrt(s / d)) - exp(s2 / d) + 20.0 + M_E
    elif kind == 4:
        for i in range(d):
            s += z[i] * z[i]
            p *= cos(z[i] / sqrt(i + 1.0))
        return s / 4000.0 - p + 1.0
    else:
        for i in range(d):
            s += z[i] * z[i]
            s2 += 0.5 * (i + 1.0) * z[i]
        return s + s2 * s2 + s2 * s2 * s2 * s2


def eval_base(int kind, const double[::1] z):
    """Canonical base function value at ``z``."""
    return _base(kind, &z[0], z.shape[0])


def transformed_batch(int kind, const double[:, ::1] X, const double[::1] shift,
                      const double[:, ::1] rotation, double scale, double offset,
                      double bias):
    """``base(M (scale (x - o)) + offset) + bias`` for each row of ``X``."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], r, i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] outv = out
    cdef double* y = <double*> malloc(d * sizeof(double))
    cdef double* z = <double*> malloc(d * sizeof(double))
    cdef double acc
    if y == NULL or z == NULL:
        free(y)
        free(z)
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                for j in range(d):
                    y[j] = scale * (X[r, j] - shift[j])
                for i in range(d):
                    acc = 0.0
                    for j in range(d):
                        acc += rotation[i, j] * y[j]
                    z[i] = acc + offset
                outv[r] = _base(kind, z, d) + bias
    finally:
        free(y)
        free(z)
    return out


def mean_pairwise_distance(const double[:, ::1] X):
    """Mean Euclidean distance over all unordered member pairs."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], a, b, j
    cdef double total = 0.0, s, t
    if n < 2:
        return 0.0
    with nogil:
        for a in range(n - 1):
            for b in range(a + 1, n):
                s = 0.0
                for j in range(d):
                    t = X[a, j] - X[b, j]
                    s += t * t
                total += sqrt(s)
    return total / (n * (n - 1) / 2.0)
