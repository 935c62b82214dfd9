"""Time-domain simulation of truncated spectral systems and empirical BIBO
ratios.

Each mode is a scalar ODE ``x' = lambda x + b u`` driven by a
piecewise-constant input, so it is propagated with its exact one-step map
rather than an ODE solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import OutsideDomain, Signal, SpectralSystemSpec, sup_norm
from .expint import dphi1, phi1, step_coefficients
from .measure import _segment_integrals, measure_from_spec, total_variation
from .spectral import evaluate_transfer, impulse_density

__all__ = [
    "DEFAULT_SEED",
    "GridMismatch",
    "StateTrajectory",
    "InputSuite",
    "simulate_state",
    "evaluate_output",
    "simulate_output",
    "step_input",
    "alternating_input",
    "random_input",
    "sign_matched_input",
    "empirical_bibo_ratio",
    "laplace_consistency_check",
    "tv_bound",
]

DEFAULT_SEED = 20240917


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """Modal states ``modes[n, k] = x_n(k * dt)``."""

    dt: float
    modes: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.modes.shape[1]


def simulate_state(spec: SpectralSystemSpec, u: Signal) -> StateTrajectory:
    """States from ``x(0) = 0`` via the variation-of-constants formula, one
    exact exponential step per grid segment."""
    decay, gain = step_coefficients(spec.eigenvalues, u.dt)
    x = kernels.propagate(decay, spec.b * gain, u.samples)
    return StateTrajectory(u.dt, x)


def evaluate_output(spec: SpectralSystemSpec, traj: StateTrajectory, u: Signal) -> Signal:
    """``y(t_k) = sum_n conj(c_n) x_n(t_k) + feedthrough * u(t_k)``."""
    if traj.dt != u.dt or traj.n_steps != len(u) or traj.modes.shape[0] != spec.n_modes:
        raise GridMismatch("trajectory does not match the system or the input grid")
    y = kernels.weighted_mode_sum(traj.modes, np.conj(spec.c)) if spec.n_modes \
        else np.zeros(len(u), dtype=np.complex128)
    return Signal(u.dt, y + spec.feedthrough * u.samples)


def simulate_output(spec: SpectralSystemSpec, u: Signal) -> Signal:
    """Output without materializing the state trajectory."""
    decay, gain = step_coefficients(spec.eigenvalues, u.dt)
    y = kernels.modal_response(decay, spec.b * gain, np.conj(spec.c), u.samples)
    return Signal(u.dt, y + spec.feedthrough * u.samples)


# --- input generators -----------------------------------------------------

def _n_samples(dt: float, tmax: float) -> int:
    return int(round(tmax / dt)) + 1


def step_input(dt: float, tmax: float) -> Signal:
    return Signal(dt, np.ones(_n_samples(dt, tmax)), meta={"label": "step"})


def alternating_input(dt: float, tmax: float, period: float = 1.0) -> Signal:
    """``+1`` and ``-1`` alternating every ``period`` time units."""
    k = np.arange(_n_samples(dt, tmax))
    vals = np.where((np.floor(k * dt / period + 1e-9).astype(int) % 2) == 0, 1.0, -1.0)
    return Signal(dt, vals, meta={"label": "alternating"})


def random_input(rng: np.random.Generator, dt: float, tmax: float,
                 mean_hold: float = 0.5, complex_valued: bool = False) -> Signal:
    """Piecewise-constant unit-modulus input with exponentially distributed
    hold times."""
    n = _n_samples(dt, tmax)
    vals = np.empty(n, dtype=np.complex128)
    k = 0
    while k < n:
        hold = max(int(rng.exponential(mean_hold) / dt), 1)
        if complex_valued:
            v = np.exp(2j * np.pi * rng.random())
        else:
            v = 1.0 if rng.random() < 0.5 else -1.0
        vals[k:k + hold] = v
        k += hold
    return Signal(dt, vals, meta={"label": "random"})


def sign_matched_input(spec: SpectralSystemSpec, dt: float, tmax: float) -> Signal:
    """Unit-modulus input maximizing ``|y(T)|`` over all inputs bounded by 1
    on the grid: each sample is the conjugate phase of the impulse-response
    mass it meets at ``T``."""
    n = _n_samples(dt, tmax)
    vals = np.ones(n, dtype=np.complex128)
    dens = impulse_density(spec)
    if dens.coeff_l1 > 0:
        H = _segment_integrals(dens, n, dt)
        seg = H[1:][::-1]  # sample j < n-1 meets H[n-1-j]
        mag = np.abs(seg)
        vals[:-1] = np.where(mag > 0, np.conj(seg) / np.where(mag > 0, mag, 1.0), 1.0)
    if spec.feedthrough != 0:
        vals[-1] = np.conj(spec.feedthrough) / abs(spec.feedthrough)
    return Signal(dt, vals, meta={"label": "sign-matched"})


@dataclass(frozen=True)
class InputSuite:
    """Seeded generator of test inputs for :func:`empirical_bibo_ratio`."""

    dt: float = 0.01
    tmax: float = 20.0
    seed: int = DEFAULT_SEED
    mean_hold: float = 0.5
    complex_valued: bool = False

    def generate(self, spec: SpectralSystemSpec, n_inputs: int):
        yield step_input(self.dt, self.tmax)
        yield alternating_input(self.dt, self.tmax)
        yield sign_matched_input(spec, self.dt, self.tmax)
        rng = np.random.default_rng(self.seed)
        for _ in range(n_inputs):
            yield random_input(rng, self.dt, self.tmax, self.mean_hold, self.complex_valued)


def empirical_bibo_ratio(spec: SpectralSystemSpec, input_suite: InputSuite | None = None,
                         n_inputs: int = 10) -> tuple[float, Signal]:
    """Largest ``sup|y| / sup|u|`` over the suite's deterministic probes and
    ``n_inputs`` random inputs.  Returns the ratio and the input attaining
    it."""
    if n_inputs < 1:
        raise ValueError("n_inputs must be >= 1")
    suite = input_suite or InputSuite()
    best, witness = -1.0, None
    for u in suite.generate(spec, n_inputs):
        ratio = sup_norm(simulate_output(spec, u)) / sup_norm(u)
        if ratio > best:
            best, witness = ratio, u
    return best, witness


# --- Laplace relation -----------------------------------------------------

def _input_transform(u: Signal, s: complex) -> complex:
    dt = u.dt
    k = np.arange(len(u) - 1)
    terms = u.samples[:-1] * np.exp(-s * dt * k) * (dt * phi1(np.array([-s * dt]))[0])
    return kernels.csum(terms)


def _state_transform(spec: SpectralSystemSpec, traj: StateTrajectory, u: Signal,
                     s: complex) -> np.ndarray:
    """Exact Laplace transform of every modal state, using that ``u`` is zero
    from the last sample on (free decay afterwards)."""
    dt = u.dt
    lam = spec.eigenvalues
    K = len(u)
    z0 = -s * dt
    z1 = (lam - s) * dt
    p1 = phi1(z1)
    p0 = phi1(np.array([z0]))[0]
    small = np.abs(lam * dt) < 1e-6
    dd = np.empty_like(z1)
    dd[~small] = (p1[~small] - p0) / (z1[~small] - z0)
    dd[small] = dphi1(0.5 * (z1[small] + z0))
    shift = np.exp(-s * dt * np.arange(K - 1))
    x = traj.modes
    out = np.empty(spec.n_modes, dtype=np.complex128)
    for n in range(spec.n_modes):
        seg = shift * (x[n, :-1] * dt * p1[n] + spec.b[n] * u.samples[:-1] * dt * dt * dd[n])
        tail = x[n, -1] * np.exp(-s * dt * (K - 1)) / (s - lam[n])
        out[n] = kernels.csum(np.append(seg, tail))
    return out


def laplace_consistency_check(spec: SpectralSystemSpec, u: Signal, s_points) -> float:
    """Largest ``|Y(s) - G(s) U(s)| / (1 + |U(s)|)`` over ``s_points``.

    ``u`` must vanish from its last sample on; ``Y`` is transformed exactly
    segment by segment from the simulated states, including the free decay
    after the input switches off.
    """
    if u.samples.ndim != 1 or len(u) < 2:
        raise ValueError("need a scalar input with at least two samples")
    if u.samples[-1] != 0:
        raise ValueError("input must vanish at the end of the grid (compact support)")
    traj = simulate_state(spec, u)
    worst = 0.0
    for s in s_points:
        s = complex(s)
        if spec.n_modes and s.real <= spec.abscissa:
            raise OutsideDomain(f"Re s = {s.real:g} <= {spec.abscissa:g}")
        U = _input_transform(u, s)
        Y = spec.feedthrough * U
        if spec.n_modes:
            Y += kernels.csum(np.conj(spec.c) * _state_transform(spec, traj, u, s))
        G = evaluate_transfer(spec, s)
        worst = max(worst, abs(Y - G * U) / (1.0 + abs(U)))
    return worst


def tv_bound(spec: SpectralSystemSpec) -> float:
    """Total variation of the impulse response, the best-known BIBO gain bound."""
    return total_variation(measure_from_spec(spec))
