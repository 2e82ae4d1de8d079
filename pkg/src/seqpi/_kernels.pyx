# cython: language_level=3
"""Compiled path kernels for the Bernoulli quantile process."""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY
from numpy.random cimport bitgen_t

from .streams import replicate_bitgen


cdef inline double _scan(bitgen_t *rng, const double *u, double p, Py_ssize_t m,
                         const double[::1] denom, Py_ssize_t n_steps) noexcept nogil:
    # exactly one of rng / u is non-NULL
    cdef long long count = 0
    cdef double zmin = INFINITY
    cdef double v, x
    cdef Py_ssize_t t
    for t in range(n_steps):
        x = rng.next_double(rng.state) if rng != NULL else u[t]
        if x < p:
            count += 1
        if t + 1 >= m:
            v = (<double>count - p * <double>(t + 1)) / denom[t]
            if v < zmin:
                zmin = v
    return zmin


def _check(Py_ssize_t n_steps, Py_ssize_t m, Py_ssize_t n_denom):
    if n_denom < n_steps:
        raise ValueError("denom shorter than the path length")
    if m < 1 or m > n_steps:
        raise ValueError("m must lie in [1, path length]")


def path_min_ratio(const double[:, ::1] uniforms, double p, Py_ssize_t m,
                   const double[::1] denom):
    """Row-wise ``min_{t in [m, T]} S_t / denom[t-1]`` of Bernoulli(p) paths.

    ``S_t = #{u_i < p : i <= t} - p t``. Single pass, O(1) work per step.
    """
    cdef Py_ssize_t n_rows = uniforms.shape[0]
    cdef Py_ssize_t n_steps = uniforms.shape[1]
    _check(n_steps, m, denom.shape[0])
    out = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t r
    with nogil:
        for r in range(n_rows):
            res[r] = _scan(NULL, &uniforms[r, 0], p, m, denom, n_steps)
    return out


def stream_min_ratio(unsigned long long seed, Py_ssize_t start, Py_ssize_t stop,
                     double p, Py_ssize_t m, const double[::1] denom):
    """Same as ``path_min_ratio`` with replicate ``r`` drawn from its own
    Philox stream, consumed in place (no uniform matrix)."""
    cdef Py_ssize_t n_steps = denom.shape[0]
    _check(n_steps, m, n_steps)
    out = np.empty(stop - start, dtype=np.float64)
    cdef double[::1] res = out
    cdef bitgen_t *rng
    cdef Py_ssize_t r
    for r in range(start, stop):
        bg = replicate_bitgen(seed, r)
        rng = <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")
        with nogil:
            res[r - start] = _scan(rng, NULL, p, m, denom, n_steps)
    return out
