import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bibostab.core import Signal, SpecError, SpectralSystemSpec
from bibostab.corpus import basel_system, random_stable_spec
from bibostab.measure import (BVMeasure, NonIntegrableDensity, ZeroInput, bibo_bound_check,
                              convolve, convolve_segments, measure_from_spec, read_signal_csv,
                              total_variation, write_signal_csv)
from bibostab.simulate import alternating_input, step_input
from bibostab.spectral import ImpulseDensity

EXP = ImpulseDensity.from_modes([-1.0], [1.0])


def test_total_variation_single_atom():
    assert total_variation(BVMeasure.dirac(2.0)) == 2.0


def test_total_variation_exponential_density():
    assert total_variation(BVMeasure(density=EXP)) == pytest.approx(1.0, abs=1e-8)


def test_total_variation_basel_upper_bound():
    h = measure_from_spec(basel_system(400, feedthrough=-0.5, with_tail=False))
    tv = total_variation(h)
    # positive density: TV is the integral, which equals G(0) - alpha
    partial = math.fsum(1.0 / n ** 2 for n in range(1, 401))
    assert tv == pytest.approx(0.5 + partial, abs=1e-9)
    assert tv <= 0.5 + math.pi ** 2 / 6


def test_total_variation_needs_decay():
    slow = ImpulseDensity.from_callable(lambda t: 1.0, 0.0, 1.0)
    with pytest.raises(NonIntegrableDensity):
        total_variation(BVMeasure(density=slow))


def test_atoms_validated():
    with pytest.raises(SpecError):
        BVMeasure(atoms=((1.0, 1.0), (0.5, 1.0)))
    with pytest.raises(SpecError):
        BVMeasure(atoms=((-1.0, 1.0),))


def test_dirac_convolution_is_identity(rng):
    u = Signal(0.1, rng.normal(size=50) + 1j * rng.normal(size=50))
    np.testing.assert_array_equal(convolve(BVMeasure.dirac(), u).samples, u.samples)


def test_delayed_atom_shifts_input():
    u = Signal(0.5, np.arange(6.0))
    y = convolve(BVMeasure(atoms=((1.0, 2.0),)), u)
    np.testing.assert_array_equal(y.samples, [0, 0, 0, 2, 4, 6])
    assert y.meta["snap_error"] == 0.0


def test_step_response_of_exponential_density():
    u = Signal.constant(1.0, 1e-3, 5.0)
    y = convolve(BVMeasure(density=EXP), u)
    assert y.samples[-1] == pytest.approx(1 - math.exp(-5), abs=1e-9)
    assert y.samples[-1].real == pytest.approx(0.993262, abs=1e-6)


def test_step_response_of_difference_density():
    h = measure_from_spec(SpectralSystemSpec([-1, -2], [1, 1], [1, -1]))
    u = Signal.constant(1.0, 0.01, 30.0)
    y = convolve(h, u)
    t = u.times
    np.testing.assert_allclose(y.samples, (1 - np.exp(-t)) - (1 - np.exp(-2 * t)) / 2, atol=1e-12)
    assert y.samples[-1] == pytest.approx(0.5, abs=1e-12)


def test_convolve_matches_segment_path(rng):
    for _ in range(5):
        spec = random_stable_spec(rng, n_max=10, re_range=(-5, -0.5), im_scale=2.0)
        h = measure_from_spec(spec)
        u = Signal(0.02, np.sign(rng.normal(size=400)))
        np.testing.assert_allclose(convolve(h, u).samples, convolve_segments(h, u).samples,
                                   atol=1e-11)


def test_convolve_general_density_uses_quadrature():
    h_modal = BVMeasure(density=EXP)
    h_call = BVMeasure(density=ImpulseDensity.from_callable(
        lambda t: np.exp(-np.asarray(t)), 1.0, 1.0))
    u = alternating_input(0.05, 4.0)
    np.testing.assert_allclose(convolve(h_call, u).samples, convolve(h_modal, u).samples,
                               atol=1e-12)


def test_bibo_bound_check_examples():
    h = BVMeasure(density=EXP)
    ratio, bound, ok = bibo_bound_check(h, step_input(0.01, 8.0))
    assert ratio == pytest.approx(1 - math.exp(-8), abs=1e-9) and ok
    assert bound == pytest.approx(1.0, abs=1e-8)
    ratio, bound, ok = bibo_bound_check(BVMeasure.dirac(2.0), alternating_input(0.1, 3.0))
    assert ratio == bound == 2.0 and ok
    ratio, _, ok = bibo_bound_check(h, alternating_input(0.001, 10.0))
    # alternating every unit: the first rise y(1) = 1 - e^-1 beats the
    # steady-state peak tanh(1/2)
    assert ratio < 1 and ok
    assert ratio == pytest.approx(1 - math.exp(-1), abs=1e-9)


def test_bibo_bound_check_zero_input():
    with pytest.raises(ZeroInput):
        bibo_bound_check(BVMeasure.dirac(), Signal(0.1, np.zeros(3)))


@given(st.integers(0, 2**32 - 1))
def test_convolution_obeys_total_variation_bound(seed):
    rng = np.random.default_rng(seed)
    spec = random_stable_spec(rng, n_max=8, re_range=(-10, -0.2), im_scale=3.0)
    h = measure_from_spec(spec)
    u = Signal(0.01, np.exp(2j * np.pi * rng.random(800)))
    ratio, bound, ok = bibo_bound_check(h, u)
    assert ok


def test_csv_round_trip(tmp_path):
    sig = Signal(0.1, np.array([1 / 3, -2e-300 + 1j, math.pi]))
    path = tmp_path / "s.csv"
    write_signal_csv(sig, path)
    back = read_signal_csv(path)
    np.testing.assert_array_equal(back.samples, sig.samples)
    assert back.dt == sig.dt
    assert path.read_text().splitlines()[0] == "t,re,im"


@pytest.mark.parametrize("text", ["x,y\n0,1\n", "t,re,im\n0,1,0\n", "t,re,im\n0,1,0\n0.1,a,0\n",
                                  "t,re,im\n0,1,0\n0.1,1,0\n0.3,1,0\n"])
def test_csv_errors(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(SpecError):
        read_signal_csv(path)
