"""Transfer functions, impulse responses and sufficient BIBO conditions for
truncated Riesz-spectral systems.

All checkers report on the truncated system.  When the system carries a tail
model, its analytic bound for the discarded modes is added; nothing is
extrapolated beyond what the tail model states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .core import (BiboReport, Condition, HalfPlane, OutsideDomain, PoleHit,
                   SpectralSystemSpec, UnstableMode, Verdict)
from .quadrature import QuadratureConfig, exp_tail, integrate_abs, truncation_time

__all__ = [
    "TransferFn",
    "ImpulseDensity",
    "SectorViolation",
    "NotExponentiallyStable",
    "evaluate_transfer",
    "evaluate_transfer_many",
    "transfer_function",
    "transfer_difference",
    "transfer_difference_check",
    "check_cond_riesz",
    "check_finite_unstable",
    "impulse_density",
    "check_impulse_l1",
    "check_fractional_orders",
]

POLE_EPS = 1e-12


class SectorViolation(ValueError):
    pass


class NotExponentiallyStable(ValueError):
    pass


@dataclass(frozen=True)
class TransferFn:
    """An analytic function on the half-plane ``domain``.

    ``batch``, when given, evaluates ``evaluator`` on an array of points at
    once (without the domain check).
    """

    evaluator: Callable[[complex], complex]
    domain: HalfPlane
    description: str = ""
    batch: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __call__(self, s) -> complex:
        s = complex(s)
        if s.real <= self.domain.abscissa:
            raise OutsideDomain(f"Re s = {s.real:g} <= {self.domain.abscissa:g}")
        return complex(self.evaluator(s))

    def evaluate_many(self, s) -> np.ndarray:
        """``evaluator`` at every point of ``s`` (no domain check)."""
        s = np.asarray(s, dtype=np.complex128)
        if self.batch is not None:
            return np.asarray(self.batch(s), dtype=np.complex128).reshape(s.shape)
        flat = [complex(self.evaluator(complex(z))) for z in s.reshape(-1)]
        return np.array(flat, dtype=np.complex128).reshape(s.shape)

    def shifted(self, offset: complex, description: str = "") -> "TransferFn":
        """``s -> self(s) - offset``."""
        ev, batch = self.evaluator, self.batch
        return TransferFn(lambda s: ev(s) - offset, self.domain,
                          description or f"{self.description} - {offset}",
                          None if batch is None else (lambda s: batch(s) - offset))


@dataclass(frozen=True, eq=False)
class ImpulseDensity:
    """Density ``t -> sum_n weights[n] * exp(rates[n] * t)`` on ``t >= 0``.

    Modes with equal rates are merged, so exactly cancelling pairs vanish.
    A density that is not a finite exponential sum can be wrapped with
    :meth:`from_callable`; ``rates`` and ``weights`` are then ``None``.
    """

    rates: np.ndarray | None
    weights: np.ndarray | None
    decay_rate: float
    coeff_l1: float
    func: Callable | None = field(default=None, repr=False)

    @classmethod
    def from_modes(cls, rates, weights) -> "ImpulseDensity":
        rates = np.asarray(rates, dtype=np.complex128).reshape(-1)
        weights = np.asarray(weights, dtype=np.complex128).reshape(-1)
        merged: dict[complex, list[complex]] = {}
        for lam, w in zip(rates.tolist(), weights.tolist()):
            merged.setdefault(lam, []).append(w)
        lam_out, w_out = [], []
        for lam, ws in merged.items():
            w = kernels.csum(np.array(ws, dtype=np.complex128))
            if w != 0:
                lam_out.append(lam)
                w_out.append(w)
        lam_arr = np.array(lam_out, dtype=np.complex128)
        w_arr = np.array(w_out, dtype=np.complex128)
        decay = -float(np.max(lam_arr.real)) if lam_arr.size else math.inf
        l1 = math.fsum(np.abs(w_arr).tolist())
        return cls(lam_arr, w_arr, decay, l1)

    @classmethod
    def from_callable(cls, func, decay_rate: float, coeff_l1: float) -> "ImpulseDensity":
        """Wrap ``func`` with envelope ``|func(t)| <= coeff_l1 * exp(-decay_rate*t)``."""
        return cls(None, None, float(decay_rate), float(coeff_l1), func)

    @property
    def is_modal(self) -> bool:
        return self.rates is not None

    @property
    def fastest_rate(self) -> float:
        if self.is_modal and self.rates.size:
            return float(np.max(np.abs(self.rates)))
        return max(self.decay_rate, 1.0) if math.isfinite(self.decay_rate) else 1.0

    def __call__(self, t):
        if not self.is_modal:
            return self.func(t)
        t_arr = np.asarray(t, dtype=float)
        if self.rates.size == 0:
            out = np.zeros(t_arr.shape, dtype=np.complex128)
        else:
            out = np.exp(np.multiply.outer(t_arr, self.rates)) @ self.weights
        return complex(out) if t_arr.ndim == 0 else out

    def envelope(self, t):
        return self.coeff_l1 * np.exp(-self.decay_rate * np.asarray(t, dtype=float))

    def l1_norm(self, cfg: QuadratureConfig | None = None) -> tuple[float, float, float]:
        """``(integral over [0, T*], quadrature error estimate, tail bound)``."""
        cfg = cfg or QuadratureConfig()
        if self.coeff_l1 == 0.0:
            return 0.0, 0.0, 0.0
        if not self.decay_rate > 0:
            raise UnstableMode("density does not decay")
        t_end = truncation_time(self.coeff_l1, self.decay_rate, cfg.tail_tol)
        if self.is_modal and self.rates.size == 1:
            # single exponential: |w| exp(Re(lam) t) integrates in closed form
            d = self.decay_rate
            val = self.coeff_l1 * -math.expm1(-d * t_end) / d
            return val, 0.0, exp_tail(self.coeff_l1, d, t_end)
        if self.is_modal:
            integrand = kernels.modal_abs(self.rates, self.weights)
            # beats between modes oscillate at the spread of imaginary parts
            freq = float(np.ptp(self.rates.imag))
        else:
            integrand = lambda t: abs(self(t))  # noqa: E731
            freq = 0.0
        val, err = integrate_abs(integrand, t_end, self.fastest_rate, cfg, freq)
        return val, err, exp_tail(self.coeff_l1, self.decay_rate, t_end)


def _check_domain(spec: SpectralSystemSpec, s: complex, pole_eps: float,
                  half_plane: bool = True):
    if spec.n_modes == 0:
        return
    if half_plane and s.real <= spec.abscissa:
        raise OutsideDomain(f"Re s = {s.real:g} is not right of abscissa {spec.abscissa:g}")
    dist = np.abs(s - spec.eigenvalues)
    scale = np.maximum(np.abs(spec.eigenvalues), 1.0)
    if np.any(dist < pole_eps * scale):
        raise PoleHit(f"s = {s} is within {pole_eps:g} of a pole")


def _mode_order(spec: SpectralSystemSpec, order: str | None) -> np.ndarray | slice:
    if order is None:
        return slice(None)
    idx = np.argsort(np.abs(spec.eigenvalues), kind="stable")
    if order == "ascending":
        return idx
    if order == "descending":
        return idx[::-1]
    raise ValueError(f"unknown order {order!r}")


def evaluate_transfer(spec: SpectralSystemSpec, s, order: str | None = None,
                      pole_eps: float = POLE_EPS, continuation: bool = False) -> complex:
    """``feedthrough + sum_n b_n conj(c_n) / (s - lambda_n)``, summed with
    compensation.  ``order`` may be ``"ascending"`` or ``"descending"`` in
    ``|lambda_n|``.

    Points left of the abscissa raise :class:`OutsideDomain` unless
    ``continuation`` is set, in which case the rational continuation is
    evaluated (poles still raise :class:`PoleHit`).
    """
    s = complex(s)
    _check_domain(spec, s, pole_eps, half_plane=not continuation)
    if spec.n_modes == 0:
        return spec.feedthrough
    sel = _mode_order(spec, order)
    terms = spec.weights[sel] / (s - spec.eigenvalues[sel])
    return spec.feedthrough + kernels.csum(terms)


def evaluate_transfer_many(spec: SpectralSystemSpec, s, pole_eps: float = POLE_EPS,
                           chunk: int = 1 << 21) -> np.ndarray:
    """Rational continuation of the transfer function at every point of
    ``s``, compensated over modes.  No half-plane check."""
    s = np.asarray(s, dtype=np.complex128)
    flat = s.reshape(-1)
    out = np.full(flat.size, spec.feedthrough, dtype=np.complex128)
    if spec.n_modes == 0 or flat.size == 0:
        return out.reshape(s.shape)
    lam = spec.eigenvalues
    scale = np.maximum(np.abs(lam), 1.0)[:, None]
    step = max(chunk // spec.n_modes, 1)
    for i in range(0, flat.size, step):
        diff = flat[None, i:i + step] - lam[:, None]
        if np.any(np.abs(diff) < pole_eps * scale):
            raise PoleHit("evaluation point within pole tolerance")
        out[i:i + step] += kernels.weighted_mode_sum(1.0 / diff, spec.weights)
    return out.reshape(s.shape)


def transfer_function(spec: SpectralSystemSpec) -> TransferFn:
    abscissa = spec.abscissa if spec.n_modes else -1e300
    return TransferFn(lambda s: evaluate_transfer(spec, s, continuation=True),
                      HalfPlane(max(abscissa, -1e300)),
                      f"spectral transfer function ({spec.n_modes} modes)",
                      batch=lambda s: evaluate_transfer_many(spec, s))


def transfer_difference(spec: SpectralSystemSpec, s1, s2, order: str | None = None) -> complex:
    """``sum_n b_n conj(c_n) (1/(s1 - lambda_n) - 1/(s2 - lambda_n))``."""
    s1, s2 = complex(s1), complex(s2)
    _check_domain(spec, s1, POLE_EPS)
    _check_domain(spec, s2, POLE_EPS)
    if spec.n_modes == 0:
        return 0j
    sel = _mode_order(spec, order)
    lam = spec.eigenvalues[sel]
    # (s2 - s1) / ((s1 - lam)(s2 - lam)) avoids subtracting nearly equal terms
    terms = spec.weights[sel] * (s2 - s1) / ((s1 - lam) * (s2 - lam))
    return kernels.csum(terms)


def transfer_difference_check(spec: SpectralSystemSpec, s1, s2) -> float:
    """Residual of the resolvent identity ``G(s1) - G(s2) = C[R(s1) - R(s2)]B``.

    The left side uses :func:`evaluate_transfer` summed in ascending
    ``|lambda|``; the right side is summed in descending order.
    """
    lhs = (evaluate_transfer(spec, s1, order="ascending")
           - evaluate_transfer(spec, s2, order="ascending"))
    rhs = transfer_difference(spec, s1, s2, order="descending")
    return abs(lhs - rhs)


def _riesz_terms(spec: SpectralSystemSpec) -> np.ndarray:
    w = np.abs(spec.weights)
    re = np.abs(spec.eigenvalues.real)
    # invisible modes contribute nothing, even on the imaginary axis
    return np.divide(w, re, out=np.zeros_like(w), where=w != 0)


def check_cond_riesz(spec: SpectralSystemSpec) -> BiboReport:
    """Summability of ``|b_k conj(c_k) / Re(lambda_k)|`` with every eigenvalue
    in the open left half-plane."""
    cond = Condition.COND_RIESZ
    if spec.n_modes and np.any(spec.eigenvalues.real >= 0):
        k = int(np.argmax(spec.eigenvalues.real >= 0))
        return BiboReport(Verdict.CONDITION_FAILED, cond,
                          notes=f"mode {k} has Re(lambda) = {spec.eigenvalues[k].real:g} >= 0; "
                                "see FiniteUnstableExt")
    raw = math.fsum(_riesz_terms(spec).tolist()) if spec.n_modes else 0.0
    tail = spec.tail.riesz_tail(spec.n_modes)
    details = {"raw_sum": (raw, "truncated-sum")}
    if math.isinf(tail):
        return BiboReport(Verdict.INCONCLUSIVE, cond, tail_bound=tail, details=details,
                          notes="tail series diverges (power-law exponent p <= 1, harmonic-type "
                                "divergence): the condition is not satisfied by the infinite system")
    bound = abs(spec.feedthrough) + raw + tail
    if spec.tail.kind == "none":
        notes = "truncated system only; no claim about discarded modes"
    else:
        notes = f"{spec.tail.kind} tail bound added for modes beyond {spec.n_modes}"
    return BiboReport(Verdict.PROVED_BIBO, cond, bound=bound, tail_bound=tail,
                      details=details, notes=notes)


def check_finite_unstable(spec: SpectralSystemSpec) -> BiboReport:
    """Finitely many eigenvalues with ``Re >= 0`` are allowed as long as their
    modes are invisible (``b_k conj(c_k) = 0``)."""
    cond = Condition.FINITE_UNSTABLE_EXT
    unstable = spec.eigenvalues.real >= 0
    if np.any(unstable & (spec.weights != 0)):
        k = int(np.argmax(unstable & (spec.weights != 0)))
        return BiboReport(Verdict.CONDITION_FAILED, cond,
                          notes=f"mode {k} has Re(lambda) >= 0 and b*conj(c) != 0")
    stable = ~unstable
    raw = math.fsum(_riesz_terms(spec)[stable].tolist()) if np.any(stable) else 0.0
    tail = spec.tail.riesz_tail(spec.n_modes)
    details = {"raw_sum": (raw, "truncated-sum"),
               "unstable_modes": (float(np.count_nonzero(unstable)), "truncated-sum")}
    if math.isinf(tail):
        return BiboReport(Verdict.INCONCLUSIVE, cond, tail_bound=tail, details=details,
                          notes="tail series diverges")
    return BiboReport(Verdict.PROVED_BIBO, cond, bound=abs(spec.feedthrough) + raw + tail,
                      tail_bound=tail, details=details,
                      notes=f"{int(np.count_nonzero(unstable))} unobservable/uncontrollable "
                            "unstable modes")


def impulse_density(spec: SpectralSystemSpec) -> ImpulseDensity:
    """Density part of the impulse response; the feedthrough atom is kept
    separately (see :func:`bibostab.measure.measure_from_spec`)."""
    contributing = spec.weights != 0
    if np.any(spec.eigenvalues.real[contributing] >= 0):
        raise UnstableMode("a mode with Re(lambda) >= 0 contributes to the impulse response")
    return ImpulseDensity.from_modes(spec.eigenvalues[contributing], spec.weights[contributing])


def check_impulse_l1(spec: SpectralSystemSpec, cfg: QuadratureConfig | None = None) -> BiboReport:
    """Integrability of the impulse density, by adaptive quadrature plus an
    analytic exponential tail bound."""
    dens = impulse_density(spec)
    val, err, tail = dens.l1_norm(cfg)
    bound = abs(spec.feedthrough) + val + err + tail
    details = {"integral": (val, "quadrature"), "quadrature_error": (err, "quadrature"),
               "exp_tail": (tail, "tail-bound")}
    notes = "L1 norm of truncated impulse density"
    if spec.tail.kind != "none":
        notes += "; discarded modes are not covered by this bound"
    return BiboReport(Verdict.PROVED_BIBO, Condition.IMPULSE_L1, bound=bound,
                      tail_bound=tail, details=details, notes=notes)


def _decay_exponent(values: np.ndarray) -> float | None:
    """Least-squares exponent ``q`` in ``values[n] ~ n**(-q)`` over the upper
    half of the index range; ``None`` when there are too few nonzero values."""
    n = np.arange(1, values.size + 1, dtype=float)
    half = values.size // 2
    v, n = values[half:], n[half:]
    keep = v > 0
    if np.count_nonzero(keep) < 4:
        return None
    slope = np.polyfit(np.log(n[keep]), np.log(v[keep]), 1)[0]
    return float(-slope)


def check_fractional_orders(spec: SpectralSystemSpec, alpha: float, beta: float,
                            sector: float | None = None,
                            cfg: QuadratureConfig | None = None,
                            trend_tol: float = 0.05) -> BiboReport:
    """Fractional-power admissibility test for analytic diagonal semigroups.

    ``B`` maps into the extrapolation space of order ``alpha`` when
    ``|b_n| / |lambda_n|**alpha`` is bounded, and similarly ``C`` with
    ``beta``.  ``alpha + beta < 1`` suffices; ``alpha + beta = 1`` also needs
    both normalized sequences square summable.  Boundedness and square
    summability of an infinite sequence are judged from the truncation by a
    log-log trend fit (tolerance ``trend_tol``) unless a power-law tail model
    settles them in closed form.

    ``sector`` is the constant ``K`` in ``|Im lambda_n| <= K |Re lambda_n|``;
    when omitted it is inferred from the truncation.
    """
    cond = Condition.FRACTIONAL_ORDERS
    if alpha < 0 or beta < 0:
        raise ValueError("orders must be nonnegative")
    lam = spec.eigenvalues
    if spec.n_modes and not np.max(lam.real) < 0:
        raise NotExponentiallyStable(f"max Re(lambda) = {np.max(lam.real):g} >= 0")
    ratio = float(np.max(np.abs(lam.imag) / np.abs(lam.real))) if spec.n_modes else 0.0
    notes = []
    if sector is None:
        notes.append(f"sector constant inferred from truncation: {ratio:.6g}")
    elif ratio > sector * (1 + 1e-12) + 1e-300:
        raise SectorViolation(f"|Im lambda|/|Re lambda| reaches {ratio:g} > {sector:g}")
    notes.append("similarity to a contraction semigroup assumed (diagonal Riesz basis)")

    mag = np.abs(lam)
    nb = np.abs(spec.b) / mag ** alpha if spec.n_modes else np.zeros(0)
    nc = np.abs(spec.c) / mag ** beta if spec.n_modes else np.zeros(0)
    tail = spec.tail
    powerlaw = tail.kind == "power-law"
    details = {"sup_b": (float(nb.max(initial=0.0)), "truncated-sum"),
               "sup_c": (float(nc.max(initial=0.0)), "truncated-sum")}

    def bounded(seq, name):
        if powerlaw:
            return True
        q = _decay_exponent(seq)
        if q is not None and q < -trend_tol:
            notes.append(f"{name} normalized coefficients grow like n^{-q:.3g}")
            return False
        return True

    def square_summable(seq, abs_coef, order, name):
        if powerlaw:
            if abs_coef == 0.0 or 2 * order * tail.p > 1:
                return True
            notes.append(f"{name}: power-law tail gives |coef|/|lambda|^order ~ n^-{order * tail.p:g}, "
                         "not square summable")
            return False
        q = _decay_exponent(seq)
        if q is None:
            notes.append(f"{name}: too few modes for a trend; finite truncation taken as square summable")
            return True
        if q <= 0.5 + trend_tol:
            notes.append(f"{name}: normalized coefficients decay like n^-{q:.3g}, not square summable")
            return False
        return True

    if not (bounded(nb, "b") and bounded(nc, "c")):
        return BiboReport(Verdict.INCONCLUSIVE, cond, details=details, notes="; ".join(notes))

    total = alpha + beta
    if total < 1 - 1e-12:
        theorem = "alpha + beta < 1"
    elif abs(total - 1) <= 1e-12:
        ok_b = square_summable(nb, tail.b_abs, alpha, "b")
        ok_c = square_summable(nc, tail.c_abs, beta, "c")
        if not (ok_b and ok_c):
            return BiboReport(Verdict.INCONCLUSIVE, cond, details=details, notes="; ".join(notes))
        theorem = "alpha + beta = 1 with square-summable normalized coefficients"
    else:
        notes.append("alpha + beta > 1: no sufficient condition applies")
        return BiboReport(Verdict.INCONCLUSIVE, cond, details=details, notes="; ".join(notes))

    l1 = check_impulse_l1(spec, cfg)
    details.update(l1.details)
    notes.insert(0, theorem)
    return BiboReport(Verdict.PROVED_BIBO, cond, bound=l1.bound, tail_bound=l1.tail_bound,
                      details=details, notes="; ".join(notes))
