# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin, fabs, M_PI

cnp.import_array()

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double SERIES_LIMIT = 12.0
cdef int SERIES_TERMS = 48
cdef int ASYMPTOTIC_TERMS = 40


cdef double INV_K2[48]
cdef double HARMONIC[48]
cdef int _k
HARMONIC[0] = 0.0
for _k in range(1, 48):
    INV_K2[_k] = 1.0 / (<double>_k * _k)
    HARMONIC[_k] = HARMONIC[_k - 1] + 1.0 / _k


cdef inline double complex _h0_series(double x) nogil:
    cdef double y = 0.25 * x * x
    cdef double term = 1.0, j0 = 1.0, tail = 0.0
    cdef int k
    for k in range(1, SERIES_TERMS):
        term = -term * y * INV_K2[k]
        j0 += term
        tail -= HARMONIC[k] * term
        # terms decrease once k^2 > y; stop when they no longer matter
        if k * k > y and fabs(term) * (1.0 + HARMONIC[k]) < 1e-17:
            break
    cdef double y0 = (2.0 / M_PI) * ((log(0.5 * x) + EULER_GAMMA) * j0 + tail)
    return j0 + 1j * y0


cdef inline double complex _h0_asymptotic(double x) nogil:
    # term_k = term_{k-1} * (-i) (2k-1)^2 / (8 k x)
    cdef double tr = 1.0, ti = 0.0, sr = 1.0, si = 0.0
    cdef double f, nr, ni, mag, last = 1e300
    cdef int k
    for k in range(1, ASYMPTOTIC_TERMS):
        f = (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x)
        nr = ti * f
        ni = -tr * f
        mag = sqrt(nr * nr + ni * ni)
        if mag >= last or mag <= 1e-17:
            break
        tr = nr
        ti = ni
        sr += tr
        si += ti
        last = mag
    cdef double amp = sqrt(2.0 / (M_PI * x))
    cdef double ph = x - 0.25 * M_PI
    cdef double c = cos(ph), s = sin(ph)
    return amp * ((sr * c - si * s) + 1j * (sr * s + si * c))


def hankel1_0(x):
    cdef cnp.ndarray[double, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xf.shape[0], i
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double[::1] xv = xf
    cdef double xi
    with nogil:
        for i in range(n):
            xi = xv[i]
            if xi < SERIES_LIMIT:
                ov[i] = _h0_series(xi)
            else:
                ov[i] = _h0_asymptotic(xi)
    return out.reshape(np.shape(x))


def dense_from_table(table):
    cdef double complex[:, ::1] t = np.ascontiguousarray(table, dtype=np.complex128)
    cdef Py_ssize_t n = t.shape[0]
    out = np.empty((n * n, n * n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef Py_ssize_t i2, i1, j2, j1, row, a
    with nogil:
        for i2 in range(n):
            for i1 in range(n):
                row = i2 * n + i1
                for j2 in range(n):
                    a = i2 - j2 if i2 >= j2 else j2 - i2
                    for j1 in range(n):
                        o[row, j2 * n + j1] = t[a, i1 - j1 if i1 >= j1 else j1 - i1]
    return out
