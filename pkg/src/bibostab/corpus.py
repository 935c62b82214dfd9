"""Reference systems used by the test and benchmark suites."""

from __future__ import annotations

import numpy as np

from .core import SpectralSystemSpec, TailModel

__all__ = [
    "single_mode",
    "stacked_system",
    "basel_system",
    "harmonic_system",
    "random_stable_spec",
    "corpus_systems",
]


def single_mode(rate: complex = -1.0, b: complex = 1.0, c: complex = 1.0,
                feedthrough: complex = 0.0) -> SpectralSystemSpec:
    return SpectralSystemSpec([rate], [b], [c], feedthrough)


def stacked_system(M: int, feedthrough: complex = 0.0,
                   infinite: bool = False) -> SpectralSystemSpec:
    """Pairs of equal modes ``-k`` whose output weights cancel, so the
    impulse response vanishes while ``sum |b c / Re lambda|`` grows like
    ``2 log M``.

    With ``infinite=True`` the discarded modes are described by a unit
    power-law tail of exponent 1, whose mode sum diverges.
    """
    k = np.arange(1, 2 * M + 1)
    lam = -np.ceil(k / 2.0)
    c = np.where(k % 2 == 1, 1.0, -1.0)
    tail = TailModel("power-law", a=0.5, p=1.0) if infinite else TailModel()
    return SpectralSystemSpec(lam, np.ones(2 * M), c, feedthrough, tail)


def basel_system(N: int, feedthrough: complex = 0.0, with_tail: bool = True) -> SpectralSystemSpec:
    """``lambda_n = -n**2`` with unit coefficients; the mode sum of
    ``1/n**2`` converges to ``pi**2/6``."""
    n = np.arange(1, N + 1, dtype=float)
    tail = TailModel("power-law", a=1.0, p=2.0, b_abs=1.0, c_abs=1.0) if with_tail else TailModel()
    return SpectralSystemSpec(-n ** 2, np.ones(N), np.ones(N), feedthrough, tail)


def harmonic_system(N: int) -> SpectralSystemSpec:
    """``lambda_n = -n`` with unit coefficients and a divergent tail."""
    n = np.arange(1, N + 1, dtype=float)
    tail = TailModel("power-law", a=1.0, p=1.0, b_abs=1.0, c_abs=1.0)
    return SpectralSystemSpec(-n, np.ones(N), np.ones(N), 0.0, tail)


def random_stable_spec(rng: np.random.Generator, n_max: int = 100,
                       re_range: tuple = (-50.0, -0.1), im_scale: float = 5.0,
                       complex_coeffs: bool = True) -> SpectralSystemSpec:
    """Random stable system with ``1 <= N <= n_max`` modes.

    Real parts are log-uniform in ``re_range``; imaginary parts are normal
    with standard deviation ``im_scale``.
    """
    n = int(rng.integers(1, n_max + 1))
    lo, hi = -re_range[0], -re_range[1]
    re = -np.exp(rng.uniform(np.log(hi), np.log(lo), n))
    im = rng.normal(0.0, im_scale, n) if im_scale > 0 else np.zeros(n)

    def coeffs():
        v = rng.normal(size=n)
        if complex_coeffs:
            v = v + 1j * rng.normal(size=n)
        return v / np.sqrt(n)

    return SpectralSystemSpec(re + 1j * im, coeffs(), coeffs(), complex(rng.normal(), 0.0))


def corpus_systems(seed: int = 7) -> list[tuple[str, SpectralSystemSpec]]:
    """Twenty named systems: hand-picked cases followed by seeded random
    ones with moderate decay rates and oscillation frequencies."""
    out = [
        ("single", single_mode()),
        ("two-mode-difference", SpectralSystemSpec([-1, -2], [1, 1], [1, -1])),
        ("two-mode-sum", SpectralSystemSpec([-1, -2], [1, 1], [1, 1], 0.5)),
        ("basel-10", basel_system(10, with_tail=False)),
        ("complex-pair", SpectralSystemSpec([-1 + 2j, -1 - 2j], [1, 1], [1, 1])),
        ("stacked-5", stacked_system(5)),
        ("scaled-harmonic", SpectralSystemSpec(-np.arange(1.0, 21.0), np.ones(20),
                                               1.0 / np.arange(1.0, 21.0))),
        ("lightly-damped", SpectralSystemSpec([-0.5 + 3j], [1.0], [1j], -0.25)),
    ]
    rng = np.random.default_rng(seed)
    while len(out) < 20:
        spec = random_stable_spec(rng, n_max=12, re_range=(-8.0, -0.5), im_scale=1.5)
        out.append((f"random-{len(out)}", spec))
    return out
