import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bibostab.core import (EMPTY_ABSCISSA, BiboReport, Condition, HalfPlane, LengthMismatch,
                           NonFiniteEntry, Signal, SpecError, SpectralSystemSpec, TailModel,
                           Verdict, load_spec, spec_from_dict, spec_to_dict, sup_norm,
                           validate_spec)


def test_single_mode_is_valid():
    spec = validate_spec(SpectralSystemSpec([-1], [1], [1], 0.0))
    assert spec.n_modes == 1
    assert spec.abscissa == -1.0


def test_empty_system_uses_sentinel_abscissa():
    spec = SpectralSystemSpec([], [], [], 2.0)
    assert spec.n_modes == 0
    assert spec.abscissa == EMPTY_ABSCISSA
    assert spec.feedthrough == 2


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        SpectralSystemSpec([-1, -2, -3], [1, 1], [1, 1, 1])


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_non_finite_entries(bad):
    with pytest.raises(NonFiniteEntry):
        SpectralSystemSpec([-1, bad], [1, 1], [1, 1])
    with pytest.raises(NonFiniteEntry):
        SpectralSystemSpec([-1], [1], [1], bad)


def test_validate_is_idempotent():
    spec = SpectralSystemSpec([-1 + 1j], [2], [1j])
    assert validate_spec(spec) is spec
    assert validate_spec(validate_spec(spec)) is spec


def test_arrays_are_read_only():
    spec = SpectralSystemSpec([-1], [1], [1])
    with pytest.raises(ValueError):
        spec.eigenvalues[0] = 3.0


def test_weights_conjugate_output_coefficient():
    spec = SpectralSystemSpec([-1], [2j], [1j])
    assert spec.weights[0] == 2j * -1j


@pytest.mark.parametrize("samples, expected", [
    ((1, -2, 0.5), 2.0),
    ((0, 0), 0.0),
    ((3 + 4j,), 5.0),
])
def test_sup_norm(samples, expected):
    assert sup_norm(Signal(0.1, np.array(samples))) == expected


def test_vector_signal_sup_norm():
    sig = Signal(0.5, np.array([[1, 2], [-3, 0.5]]))
    assert sig.sup_norm() == 3.0


def test_signal_rejects_bad_grid():
    with pytest.raises(SpecError):
        Signal(0.0, np.ones(3))
    with pytest.raises(NonFiniteEntry):
        Signal(0.1, np.array([1.0, math.nan]))


def test_signal_helpers():
    sig = Signal.constant(2.0, 0.25, 1.0)
    assert len(sig) == 5
    assert sig.duration == pytest.approx(1.0)
    np.testing.assert_allclose(sig.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert sig.scaled(-1j).sup_norm() == 2.0


def test_halfplane_membership():
    hp = HalfPlane(-1.0)
    assert 0 in hp
    assert -1 not in hp
    assert complex(-0.5, 100) in hp


def test_proved_report_needs_finite_bound():
    with pytest.raises(ValueError):
        BiboReport(Verdict.PROVED_BIBO, Condition.COND_RIESZ)
    with pytest.raises(ValueError):
        BiboReport(Verdict.PROVED_BIBO, Condition.COND_RIESZ, bound=math.inf)


def test_report_numbers_carry_provenance():
    rep = BiboReport(Verdict.PROVED_BIBO, Condition.IMPULSE_L1, bound=1.5, tail_bound=1e-13,
                     details={"integral": (1.5, "quadrature")})
    d = rep.to_dict()
    assert d["bound"] == {"value": 1.5, "provenance": "quadrature"}
    assert d["tail_bound"]["provenance"] == "tail-bound"
    assert d["details"]["integral"]["provenance"] == "quadrature"
    json.dumps(d, allow_nan=False)


def test_tail_model_riesz_tail():
    assert TailModel().riesz_tail(10) == 0.0
    assert TailModel("bound", value=0.25).riesz_tail(3) == 0.25
    assert math.isinf(TailModel("power-law", p=1.0).riesz_tail(10))
    # sum_{n>N} 1/n^2 <= 1/N
    t = TailModel("power-law", a=1.0, p=2.0).riesz_tail(1000)
    assert t == pytest.approx(1e-3)
    exact = math.pi ** 2 / 6 - math.fsum(1.0 / n ** 2 for n in range(1, 1001))
    assert exact <= t


def test_tail_model_rejects_unknown_kind():
    with pytest.raises(SpecError):
        TailModel("geometric")


def test_json_round_trip(tmp_path):
    spec = SpectralSystemSpec([-1 + 2j, -3], [1, 0.5j], [2, -1], 0.25 - 1j,
                              TailModel("power-law", a=2.0, p=3.0, b_abs=0.5, c_abs=2.0))
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec_to_dict(spec)))
    assert load_spec(path) == spec


def test_json_schema_example():
    data = {"eigenvalues": [{"re": -1.0, "im": 0.0}], "b": [{"re": 1.0, "im": 0.0}],
            "c": [{"re": 1.0, "im": 0.0}], "feedthrough": {"re": 0.0, "im": 0.0},
            "tail": {"kind": "none"}}
    spec = spec_from_dict(data)
    assert spec.n_modes == 1 and spec.abscissa == -1.0


@pytest.mark.parametrize("data", [
    [],
    {"eigenvalues": [], "b": []},
    {"eigenvalues": [{"re": "x"}], "b": [1], "c": [1]},
    {"eigenvalues": [-1], "b": [1], "c": [1], "tail": {"kind": "power-law", "q": 1}},
])
def test_json_schema_errors(data):
    with pytest.raises(SpecError):
        spec_from_dict(data)


def test_load_spec_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SpecError):
        load_spec(path)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=20))
def test_sup_norm_is_max_modulus(pairs):
    z = np.array([complex(a, b) for a, b in pairs])
    sig = Signal(1.0, z)
    assert sup_norm(sig) == pytest.approx(max(abs(v) for v in z), rel=1e-15)
    assert sup_norm(sig.scaled(-2.0)) == pytest.approx(2 * sup_norm(sig))


@given(st.lists(st.tuples(finite, finite, finite), min_size=0, max_size=10))
def test_abscissa_is_max_real_part(rows):
    lam = [complex(r, i) for r, i, _ in rows]
    spec = SpectralSystemSpec(lam, [w for *_, w in rows], np.ones(len(rows)))
    expected = max((z.real for z in lam), default=EMPTY_ABSCISSA)
    assert spec.abscissa == expected
    assert spec_from_dict(spec_to_dict(spec)) == spec
