"""Adaptive integration of ``|f|`` over ``[0, inf)`` for exponentially
decaying integrands, with an analytic tail bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class QuadratureConfig:
    epsabs: float = 1e-14
    epsrel: float = 1e-11
    #: relative size of the discarded exponential tail
    tail_tol: float = 1e-12
    #: log-spaced breakpoints per decade of time scales
    breaks_per_decade: int = 4
    limit: int = 200
    #: oscillation periods per piece when the integrand oscillates
    periods_per_piece: float = 4.0
    max_pieces: int = 4000


def truncation_time(coeff_l1: float, decay_rate: float, tail_tol: float = 1e-12) -> float:
    """Smallest ``T`` with ``coeff_l1 * exp(-decay_rate*T) / decay_rate`` below
    ``tail_tol * max(1, coeff_l1)``."""
    if coeff_l1 == 0.0 or math.isinf(decay_rate):
        return 0.0
    target = tail_tol * max(1.0, coeff_l1)
    t = math.log(coeff_l1 / (decay_rate * target)) / decay_rate
    return max(t, 0.0)


def exp_tail(coeff_l1: float, decay_rate: float, t: float) -> float:
    """Bound for ``int_t^inf coeff_l1 * exp(-decay_rate*s) ds``."""
    if coeff_l1 == 0.0 or math.isinf(decay_rate):
        return 0.0
    return coeff_l1 * math.exp(-decay_rate * t) / decay_rate


def breakpoints(t_end: float, fastest_rate: float, cfg: QuadratureConfig,
                max_frequency: float = 0.0) -> np.ndarray:
    """Grid ``0 < t_1 < ... < t_end`` resolving time scales from
    ``1/fastest_rate`` up to ``t_end``, refined to a few periods of
    ``max_frequency`` per piece."""
    if t_end <= 0.0:
        return np.array([0.0])
    t_min = min(t_end, 0.1 / max(fastest_rate, 1e-300))
    t_min = max(t_min, t_end * 1e-14)
    decades = max(math.log10(t_end / t_min), 0.0)
    n = max(int(math.ceil(decades * cfg.breaks_per_decade)), 1) + 1
    inner = np.geomspace(t_min, t_end, n)
    if max_frequency > 0.0:
        step = max(cfg.periods_per_piece * 2.0 * math.pi / max_frequency, t_end / cfg.max_pieces)
        if step < t_end:
            inner = np.union1d(inner, np.arange(step, t_end, step))
    return np.concatenate(([0.0], inner))


def integrate_abs(func, t_end: float, fastest_rate: float,
                  cfg: QuadratureConfig | None = None,
                  max_frequency: float = 0.0) -> tuple[float, float]:
    """Integrate the nonnegative ``func`` over ``[0, t_end]``.

    Returns ``(value, error_estimate)``.
    """
    cfg = cfg or QuadratureConfig()
    pts = breakpoints(t_end, fastest_rate, cfg, max_frequency)
    vals, errs = [], []
    for a, b in zip(pts[:-1], pts[1:]):
        v, e = integrate.quad(func, a, b, epsabs=cfg.epsabs,
                              epsrel=cfg.epsrel, limit=cfg.limit)
        vals.append(v)
        errs.append(e)
    return math.fsum(vals), math.fsum(errs)


def integrate_complex(func, a: float, b: float, cfg: QuadratureConfig | None = None,
                      points=None) -> complex:
    """Integrate a complex-valued ``func`` over ``[a, b]`` (``b`` may be ``inf``)."""
    cfg = cfg or QuadratureConfig()
    kw = dict(epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit)
    if points is not None and math.isfinite(b):
        kw["points"] = points
    re, _ = integrate.quad(lambda t: complex(func(t)).real, a, b, **kw)
    im, _ = integrate.quad(lambda t: complex(func(t)).imag, a, b, **kw)
    return complex(re, im)
