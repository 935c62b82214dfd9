# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for modal propagation and compensated sums.

Every routine mirrors one in ``_pykernels`` and must return the same values
up to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, exp, fabs, hypot, sin

cnp.import_array()


cdef inline void _neumaier(double *s, double *comp, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        comp[0] += (s[0] - t) + x
    else:
        comp[0] += (x - t) + s[0]
    s[0] = t


def csum(const double complex[::1] z):
    cdef Py_ssize_t i, n = z.shape[0]
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0
    with nogil:
        for i in range(n):
            _neumaier(&sr, &cr, z[i].real)
            _neumaier(&si, &ci, z[i].imag)
    return complex(sr + cr, si + ci)


def propagate(const double complex[::1] decay, const double complex[::1] gain,
              const double complex[::1] u):
    cdef Py_ssize_t n_modes = decay.shape[0], n_t = u.shape[0], n, k
    out = np.zeros((n_modes, n_t), dtype=np.complex128)
    cdef double complex[:, ::1] x = out
    cdef double complex e, g
    with nogil:
        for n in range(n_modes):
            e = decay[n]
            g = gain[n]
            for k in range(n_t - 1):
                x[n, k + 1] = e * x[n, k] + g * u[k]
    return out


def weighted_mode_sum(const double complex[:, ::1] x, const double complex[::1] w):
    cdef Py_ssize_t n_modes = x.shape[0], n_t = x.shape[1], n, k
    cdef cnp.ndarray[double, ndim=1] sr = np.zeros(n_t), cr = np.zeros(n_t)
    cdef cnp.ndarray[double, ndim=1] si = np.zeros(n_t), ci = np.zeros(n_t)
    cdef double complex v
    cdef double *psr = &sr[0] if n_t else NULL
    cdef double *pcr = &cr[0] if n_t else NULL
    cdef double *psi = &si[0] if n_t else NULL
    cdef double *pci = &ci[0] if n_t else NULL
    with nogil:
        for n in range(n_modes):
            for k in range(n_t):
                v = w[n] * x[n, k]
                _neumaier(psr + k, pcr + k, v.real)
                _neumaier(psi + k, pci + k, v.imag)
    return (sr + cr) + 1j * (si + ci)


def modal_response(const double complex[::1] decay, const double complex[::1] gain,
                   const double complex[::1] w, const double complex[::1] u):
    cdef Py_ssize_t n_modes = decay.shape[0], n_t = u.shape[0], n, k
    cdef cnp.ndarray[double, ndim=1] sr = np.zeros(n_t), cr = np.zeros(n_t)
    cdef cnp.ndarray[double, ndim=1] si = np.zeros(n_t), ci = np.zeros(n_t)
    cdef double *psr = &sr[0] if n_t else NULL
    cdef double *pcr = &cr[0] if n_t else NULL
    cdef double *psi = &si[0] if n_t else NULL
    cdef double *pci = &ci[0] if n_t else NULL
    cdef double complex x, e, g, wn, v
    with nogil:
        for n in range(n_modes):
            e = decay[n]
            g = gain[n]
            wn = w[n]
            x = 0.0
            for k in range(n_t):
                v = wn * x
                _neumaier(psr + k, pcr + k, v.real)
                _neumaier(psi + k, pci + k, v.imag)
                x = e * x + g * u[k]
    return (sr + cr) + 1j * (si + ci)


cdef class ModalAbs:
    """Callable ``t -> |sum_n weights[n] exp(rates[n] t)|`` for scalar ``t``,
    cheap enough to hand to an adaptive quadrature routine."""

    cdef double[::1] ar, ai, wr, wi
    cdef Py_ssize_t n

    def __init__(self, const double complex[::1] rates, const double complex[::1] weights):
        self.n = rates.shape[0]
        r = np.ascontiguousarray(rates)
        w = np.ascontiguousarray(weights)
        self.ar = np.ascontiguousarray(r.real)
        self.ai = np.ascontiguousarray(r.imag)
        self.wr = np.ascontiguousarray(w.real)
        self.wi = np.ascontiguousarray(w.imag)

    def __call__(self, double t):
        cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0, m, c, s
        cdef Py_ssize_t k
        for k in range(self.n):
            m = exp(self.ar[k] * t)
            if self.ai[k] == 0.0:
                c = m
                s = 0.0
            else:
                c = m * cos(self.ai[k] * t)
                s = m * sin(self.ai[k] * t)
            _neumaier(&sr, &cr, self.wr[k] * c - self.wi[k] * s)
            _neumaier(&si, &ci, self.wr[k] * s + self.wi[k] * c)
        return hypot(sr + cr, si + ci)
