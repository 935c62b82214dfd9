"""NumPy/SciPy versions of the compiled kernels in ``_ckernels``."""

import math

import numpy as np
from scipy.signal import lfilter


def csum(z):
    z = np.asarray(z, dtype=np.complex128)
    return complex(math.fsum(z.real), math.fsum(z.imag))


def _neumaier_add(s, comp, x):
    t = s + x
    big = np.abs(s) >= np.abs(x)
    comp += np.where(big, (s - t) + x, (x - t) + s)
    return t


def propagate(decay, gain, u):
    decay = np.asarray(decay, dtype=np.complex128)
    gain = np.asarray(gain, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    out = np.zeros((decay.size, u.size), dtype=np.complex128)
    if u.size < 2:
        return out
    # x[k] = e x[k-1] + g u[k-1] is a first-order IIR filter of u
    for n in range(decay.size):
        out[n] = lfilter([0.0, gain[n]], [1.0, -decay[n]], u)
    return out


def _accumulate(rows, n_t):
    sr, cr = np.zeros(n_t), np.zeros(n_t)
    si, ci = np.zeros(n_t), np.zeros(n_t)
    for v in rows:
        sr = _neumaier_add(sr, cr, v.real)
        si = _neumaier_add(si, ci, v.imag)
    return (sr + cr) + 1j * (si + ci)


def weighted_mode_sum(x, w):
    x = np.asarray(x, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    return _accumulate((w[n] * x[n] for n in range(w.size)), x.shape[1])


def modal_response(decay, gain, w, u):
    decay = np.asarray(decay, dtype=np.complex128)
    gain = np.asarray(gain, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)

    def rows():
        for n in range(decay.size):
            if u.size < 2:
                yield np.zeros(u.size, dtype=np.complex128)
                continue
            yield w[n] * lfilter([0.0, gain[n]], [1.0, -decay[n]], u)

    return _accumulate(rows(), u.size)


class ModalAbs:
    """``t -> |sum_n weights[n] exp(rates[n] t)|`` for scalar ``t``."""

    def __init__(self, rates, weights):
        self.rates = np.asarray(rates, dtype=np.complex128)
        self.weights = np.asarray(weights, dtype=np.complex128)

    def __call__(self, t):
        terms = self.weights * np.exp(self.rates * t)
        total = terms.sum()
        # plain summation unless cancellation eats most of the digits
        if abs(total) < 1e-6 * np.abs(terms).sum():
            total = csum(terms)
        return abs(total)
