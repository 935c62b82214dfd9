"""Measures of bounded total variation on ``[0, inf)`` and their action on
sampled signals by convolution."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.signal import convolve as _fft_convolve

from . import kernels
from .core import Signal, SpecError, SpectralSystemSpec, sup_norm
from .expint import step_coefficients
from .quadrature import QuadratureConfig
from .spectral import ImpulseDensity, impulse_density

__all__ = [
    "BVMeasure",
    "NonIntegrableDensity",
    "ZeroInput",
    "measure_from_spec",
    "total_variation",
    "convolve",
    "convolve_segments",
    "bibo_bound_check",
    "read_signal_csv",
    "write_signal_csv",
]


class NonIntegrableDensity(ValueError):
    pass


class ZeroInput(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BVMeasure:
    """Finite sum of point masses plus an absolutely continuous part.

    ``atoms`` is a sequence of ``(location, weight)`` with strictly increasing
    locations ``>= 0``.
    """

    atoms: tuple = ()
    density: ImpulseDensity | None = None
    _tv: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        atoms = tuple((float(loc), complex(w)) for loc, w in self.atoms)
        locs = [a[0] for a in atoms]
        if any(loc < 0 or not math.isfinite(loc) for loc in locs):
            raise SpecError("atom locations must be finite and >= 0")
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise SpecError("atom locations must be strictly increasing")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def dirac(cls, weight: complex = 1.0, location: float = 0.0) -> "BVMeasure":
        return cls(atoms=((location, weight),))


def measure_from_spec(spec: SpectralSystemSpec) -> BVMeasure:
    """Impulse response ``feedthrough * delta + sum_n b_n conj(c_n) exp(lambda_n t)``."""
    dens = impulse_density(spec)
    atoms = ((0.0, spec.feedthrough),) if spec.feedthrough != 0 else ()
    return BVMeasure(atoms=atoms, density=dens if dens.coeff_l1 > 0 else None)


def total_variation(h: BVMeasure, cfg: QuadratureConfig | None = None) -> float:
    """Atom moduli plus the L1 norm of the density.

    The density part is integrated adaptively up to the truncation time and
    the discarded exponential tail and quadrature error estimate are added,
    so the result errs on the high side.
    """
    if h._tv and cfg is None:
        return h._tv[0]
    atom_part = math.fsum(abs(w) for _, w in h.atoms)
    dens_part = 0.0
    if h.density is not None and h.density.coeff_l1 > 0:
        if not h.density.decay_rate > 0:
            raise NonIntegrableDensity(f"decay rate {h.density.decay_rate:g} <= 0")
        val, err, tail = h.density.l1_norm(cfg)
        dens_part = val + err + tail
    tv = atom_part + dens_part
    if cfg is None:
        h._tv.append(tv)
    return tv


def _atoms_on_grid(h: BVMeasure, u: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
    y = np.zeros(u.shape[0], dtype=np.complex128)
    snap = 0.0
    for loc, w in h.atoms:
        m = int(round(loc / dt))
        snap = max(snap, abs(loc - m * dt))
        if m < u.shape[0]:
            y[m:] += w * u[: u.shape[0] - m]
    return y, snap


def convolve(h: BVMeasure, u: Signal) -> Signal:
    """``y = h * u`` sampled on the grid of ``u``.

    Atoms are snapped to the nearest grid point (largest snap distance in
    ``meta["snap_error"]``).  A modal density is integrated exactly per grid
    segment through its exponential modes; other densities go through
    :func:`convolve_segments`.
    """
    if u.samples.ndim != 1:
        raise SpecError("convolution supports scalar signals only")
    samples = u.samples
    y, snap = _atoms_on_grid(h, samples, u.dt)
    dens = h.density
    if dens is not None and dens.coeff_l1 > 0:
        if dens.is_modal:
            decay, gain = step_coefficients(dens.rates, u.dt)
            y = y + kernels.modal_response(decay, gain, dens.weights, samples)
        else:
            y = y + _segment_convolution(dens, samples, u.dt)
    return Signal(u.dt, y, meta={"snap_error": snap})


def _segment_integrals(dens: ImpulseDensity, n: int, dt: float,
                       cfg: QuadratureConfig | None = None) -> np.ndarray:
    """``H[m] = int_{(m-1)dt}^{m dt} density``, ``H[0] = 0``."""
    out = np.zeros(n, dtype=np.complex128)
    if dens.is_modal:
        # exact: sum_n w_n exp(lam (m-1) dt) * dt * phi1(lam dt)
        decay, gain = step_coefficients(dens.rates, dt)
        m = np.arange(n - 1)
        out[1:] = (np.exp(np.multiply.outer(m * dt, dens.rates)) * gain) @ dens.weights
        return out
    cfg = cfg or QuadratureConfig()
    for m in range(1, n):
        a, b = (m - 1) * dt, m * dt
        re = integrate.quad(lambda t: complex(dens(t)).real, a, b, epsabs=cfg.epsabs)[0]
        im = integrate.quad(lambda t: complex(dens(t)).imag, a, b, epsabs=cfg.epsabs)[0]
        out[m] = complex(re, im)
    return out


def _segment_convolution(dens: ImpulseDensity, u: np.ndarray, dt: float) -> np.ndarray:
    H = _segment_integrals(dens, u.shape[0], dt)
    return _fft_convolve(u, H)[: u.shape[0]]


def convolve_segments(h: BVMeasure, u: Signal) -> Signal:
    """Same result as :func:`convolve`, computed as a discrete convolution of
    the samples with the per-segment integrals of the density."""
    y, snap = _atoms_on_grid(h, u.samples, u.dt)
    if h.density is not None and h.density.coeff_l1 > 0:
        y = y + _segment_convolution(h.density, u.samples, u.dt)
    return Signal(u.dt, y, meta={"snap_error": snap})


def bibo_bound_check(h: BVMeasure, u: Signal, rtol: float = 1e-6):
    """Empirical gain ``sup|h*u| / sup|u|`` against the total variation of ``h``.

    Returns ``(ratio, bound, ok)`` with ``ok`` true when
    ``ratio <= bound * (1 + rtol)``.
    """
    un = sup_norm(u)
    if un == 0.0:
        raise ZeroInput("input has zero sup norm")
    ratio = sup_norm(convolve(h, u)) / un
    bound = total_variation(h)
    return ratio, bound, ratio <= bound * (1 + rtol)


def write_signal_csv(sig: Signal, path_or_file) -> None:
    """Write ``t,re,im`` rows with 17 significant digits."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "re", "im"])
        for t, z in zip(sig.times, sig.samples):
            w.writerow([f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])
    finally:
        if own:
            fh.close()


def read_signal_csv(path) -> Signal:
    """Read a ``t,re,im`` file written on a uniform grid starting at 0."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "re", "im"]:
        raise SpecError("signal CSV must start with header t,re,im")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise SpecError(f"bad number in signal CSV: {exc}") from exc
    if data.shape[0] < 2:
        raise SpecError("signal CSV needs at least two rows")
    t = data[:, 0]
    dt = t[1] - t[0]
    if t[0] != 0.0 or not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12 * abs(dt)):
        raise SpecError("signal CSV times must form a uniform grid starting at 0")
    return Signal(float(dt), data[:, 1] + 1j * data[:, 2])
