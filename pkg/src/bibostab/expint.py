"""Exponential-integrator coefficients for piecewise-constant forcing."""

import math

import numpy as np

SMALL = 1e-8


def phi1(z):
    """``(exp(z) - 1) / z`` with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    small = np.abs(z) < SMALL
    zs = z[small]
    out[small] = 1.0 + zs / 2.0
    zb = z[~small]
    out[~small] = _expm1(zb) / zb
    return out


def _expm1(z):
    # exp(x)(cos y + i sin y) - 1 = expm1(x) cos y - 2 sin^2(y/2) + i exp(x) sin y
    x, y = z.real, z.imag
    re = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


def step_coefficients(rates, dt: float):
    """``(exp(rate*dt), dt * phi1(rate*dt))`` for each rate: the exact one-step
    map of ``x' = rate*x + u`` with ``u`` constant over the step."""
    z = np.asarray(rates, dtype=np.complex128) * dt
    return np.exp(z), dt * phi1(z)


def dphi1(z):
    """Derivative of :func:`phi1`: ``(exp(z)(z - 1) + 1) / z**2``."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    # sum_{k>=1} k z^(k-1) / (k+1)!, Horner form; 20 terms reach rounding for |z| < 0.5
    acc = np.zeros_like(zs)
    for k in range(20, 0, -1):
        acc = acc * zs + k / math.factorial(k + 1)
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.exp(zb) * (zb - 1.0) + 1.0) / zb ** 2
    return out
