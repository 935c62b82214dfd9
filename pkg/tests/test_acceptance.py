"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line; the lines are printed in the
pytest terminal summary, or directly when the file is run as a script.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from bibostab.core import Signal, SpectralSystemSpec, spec_to_dict
from bibostab.corpus import basel_system, corpus_systems, random_stable_spec, stacked_system
from bibostab.laplace import InversionConfig, invert_laplace, laplace_of_measure
from bibostab.measure import convolve, measure_from_spec
from bibostab.perturbation import (EULER_GAMMA, additive_decomposition,
                                   dense_additive_decomposition, digamma, verify_counterexample)
from bibostab.simulate import (InputSuite, empirical_bibo_ratio, evaluate_output,
                               laplace_consistency_check, random_input, simulate_output,
                               simulate_state, step_input, tv_bound)
from bibostab.spectral import (check_cond_riesz, check_impulse_l1, evaluate_transfer,
                               impulse_density, transfer_function)

pytestmark = pytest.mark.acceptance

RESULTS = []
TIME_BUDGET = 60.0


def _record(number, title, ok, detail, elapsed):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail} ({elapsed:.1f} s)"
    RESULTS.append(line)
    print(line)
    return ok


def _halfplane_points(abscissa):
    base = max(abscissa, -1e3)
    return [complex(base + d, w) for d in (0.1, 1.0, 5.0, 50.0)
            for w in (0.0, 1.0, -3.0, 10.0, 100.0)]


def test_01_bibo_inequality_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = -math.inf
    for i in range(200):
        spec = random_stable_spec(rng, n_max=100, re_range=(-50.0, -0.1))
        ratio, _ = empirical_bibo_ratio(spec, InputSuite(seed=1000 + i), n_inputs=10)
        worst = max(worst, ratio - (tv_bound(spec) + 1e-6))
    elapsed = time.perf_counter() - t0
    ok = worst <= 0 and elapsed <= TIME_BUDGET
    _record(1, "BIBO inequality, 200 systems x 10 inputs",
            ok, f"max(ratio - bound - 1e-6) = {worst:.3e}", elapsed)
    assert ok


def test_02_characterization_round_trip():
    t0 = time.perf_counter()
    inv_err, lap_err = 0.0, 0.0
    for _, spec in corpus_systems():
        dens = impulse_density(spec)
        G = transfer_function(spec).shifted(spec.feedthrough)
        dt = 0.01
        tmax = 10.0 / dens.decay_rate if dens.coeff_l1 > 0 else 10.0
        h = invert_laplace(G, InversionConfig(dt=dt, tmax=tmax))
        t = h.times[1:]
        ref = dens(t) if dens.coeff_l1 > 0 else np.zeros(t.size)
        inv_err = max(inv_err, float(np.max(np.abs(h.samples[1:] - ref))))
        mu = measure_from_spec(spec)
        for s in _halfplane_points(spec.abscissa):
            lap_err = max(lap_err, abs(laplace_of_measure(mu, s) - evaluate_transfer(spec, s)))
    elapsed = time.perf_counter() - t0
    ok = inv_err <= 1e-5 and lap_err <= 1e-10 and elapsed <= TIME_BUDGET
    _record(2, "characterization round trip, 20 corpus systems", ok,
            f"inversion error {inv_err:.2e}, transform error {lap_err:.2e}", elapsed)
    assert ok


def test_03_simulation_equals_convolution():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _, spec in corpus_systems():
        h = measure_from_spec(spec)
        for u in (step_input(0.01, 15.0), random_input(rng, 0.01, 15.0, complex_valued=True),
                  Signal(0.01, 5.0 * rng.normal(size=1501))):
            y_sim = evaluate_output(spec, simulate_state(spec, u), u).samples
            y_conv = convolve(h, u).samples
            worst = max(worst, float(np.max(np.abs(y_sim - y_conv))) / (1 + u.sup_norm()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed <= TIME_BUDGET
    _record(3, "simulation equals convolution", ok,
            f"max |y_sim - y_conv| / (1 + |u|) = {worst:.2e}", elapsed)
    assert ok


def test_04_laplace_relation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _, spec in corpus_systems():
        pts = _halfplane_points(spec.abscissa)[::4]
        for _ in range(10):
            n = int(rng.integers(50, 400))
            u = Signal(0.01, np.r_[rng.normal(size=n) + 1j * rng.normal(size=n), 0.0])
            worst = max(worst, laplace_consistency_check(spec, u, pts))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed <= TIME_BUDGET
    _record(4, "Laplace relation, 10 inputs x 5 points per system", ok,
            f"max residual {worst:.2e}", elapsed)
    assert ok


def test_05_cond_riesz_basel():
    t0 = time.perf_counter()
    alpha = 0.3 - 0.4j
    rep = check_cond_riesz(basel_system(1000, feedthrough=alpha))
    target = abs(alpha) + math.pi ** 2 / 6
    dev = abs(rep.bound - target) if rep.proved else math.inf
    ok = rep.proved and dev <= 1e-3
    _record(5, "CondRiesz Basel check", ok,
            f"bound {rep.bound:.9f} vs {target:.9f}, deviation {dev:.2e}",
            time.perf_counter() - t0)
    assert ok


def test_06_non_necessity():
    t0 = time.perf_counter()
    alpha = 0.75
    checks = []
    rng = np.random.default_rng(6)
    for M in (10, 100, 1000):
        spec = stacked_system(M, alpha)
        raw = check_cond_riesz(spec).details["raw_sum"][0]
        l1 = check_impulse_l1(spec)
        y_worst = 0.0
        for u in (step_input(0.01, 10.0), random_input(rng, 0.01, 10.0, complex_valued=True)):
            y = simulate_output(spec.with_(feedthrough=0.0), u)
            y_worst = max(y_worst, y.sup_norm() / (1 + u.sup_norm()))
        checks.append((M, raw, l1.bound, y_worst,
                       raw >= 2 * math.log(M) - 1 and abs(l1.bound - alpha) <= 1e-10
                       and y_worst <= 1e-10))
    ok = all(c[-1] for c in checks)
    M, raw, bound, yw, _ = checks[-1]
    _record(6, "non-necessity on stacked system", ok,
            f"M={M}: raw sum {raw:.3f} >= {2 * math.log(M) - 1:.3f}, "
            f"L1 bound - |alpha| = {bound - alpha:.1e}, sup|y| / (1 + |u|) = {yw:.1e}",
            time.perf_counter() - t0)
    assert ok


def test_07_counterexample():
    t0 = time.perf_counter()
    rep = verify_counterexample(1000)
    b_rows = rep["b_digamma_limit"]["rows"]
    worst_b = max(r["error"] / r["limit"] for r in b_rows)
    sizes = sorted({r["N"] for r in b_rows})
    ok = rep["passed"] and sizes == [100, 1000, 10000]
    _record(7, "multiplicative counterexample", ok,
            f"(a) {rep['a_constant_transfer']['residual']:.1e}, "
            f"(b) worst error/limit {worst_b:.2f} at N in {sizes}, "
            f"(c) {rep['c_halfplane_probe']['growth']}, "
            f"(d) {'ok' if rep['d_log_asymptote']['passed'] else 'failed'}",
            time.perf_counter() - t0)
    assert ok


def test_08_digamma():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    e1 = abs(digamma(1.0) + EULER_GAMMA)
    x = rng.uniform(0.5, 50.0, 100)
    rec = max(abs(digamma(v + 1) - digamma(v) - 1 / v) for v in x)
    dup = max(abs(digamma(2 * v) - 0.5 * digamma(v) - 0.5 * digamma(v + 0.5) - math.log(2))
              for v in x)
    ok = e1 <= 1e-12 and rec <= 1e-10 and dup <= 1e-10
    _record(8, "digamma accuracy", ok,
            f"|psi(1) + gamma| = {e1:.1e}, recurrence {rec:.1e}, duplication {dup:.1e}",
            time.perf_counter() - t0)
    assert ok


def test_09_additive_decomposition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    u = step_input(1e-3, 10.0)
    tol = 1e-8 * (1 + u.sup_norm())
    scalar = additive_decomposition(SpectralSystemSpec([-1.0], [1.0], [1.0]), [-1.0], u).residual
    diag = []
    for _ in range(20):
        N = int(rng.integers(1, 51))
        n = np.arange(1, N + 1, dtype=float)
        spec = SpectralSystemSpec(-n * rng.uniform(0.5, 2.0), rng.normal(size=N),
                                  rng.normal(size=N), rng.normal())
        p = 0.5 * np.sin(n + rng.uniform(0, 2 * np.pi))
        v = Signal(0.01, np.sign(rng.normal(size=1001)))
        diag.append(additive_decomposition(spec, p, v).residual / (1 + v.sup_norm()))
    dense = []
    for N in (5, 20, 50):
        n = np.arange(1, N + 1, dtype=float)
        spec = SpectralSystemSpec(-n, np.ones(N), np.ones(N))
        P = 0.3 * rng.normal(size=(N, N)) / math.sqrt(N)
        v = Signal(0.01, np.exp(2j * np.pi * rng.random(501)))
        dense.append(dense_additive_decomposition(spec, P, v).residual / (1 + v.sup_norm()))
    ok = scalar <= tol and max(diag) <= 1e-8 and max(dense) <= 1e-8
    _record(9, "additive decomposition", ok,
            f"scalar {scalar:.1e}, diagonal max {max(diag):.1e}, dense max {max(dense):.1e}",
            time.perf_counter() - t0)
    assert ok


def test_10_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_to_dict(
        random_stable_spec(np.random.default_rng(10), n_max=20))))
    commands = [
        ["analyze", str(spec_path)],
        ["simulate", str(spec_path), "--tmax", "5", "--seed", "11", "-o", "{out}.csv",
         "--report", "{out}.json"],
        ["invlap", str(spec_path), "--tmax", "2"],
        ["perturb", "demo-mult", "--N", "200", "--csv", "{out}.csv"],
        ["perturb", "demo-add", "--N", "10", "--dt", "0.01", "--tmax", "2"],
    ]
    same = []
    for ci, cmd in enumerate(commands):
        blobs = []
        for rep in range(2):
            out = tmp_path / f"c{ci}_{rep}"
            argv = [a.replace("{out}", str(out)) for a in cmd]
            if "-o" not in argv:
                argv += ["-o", f"{out}.main"]
            proc = subprocess.run([sys.executable, "-m", "bibostab.cli", *argv],
                                  capture_output=True)
            files = sorted(tmp_path.glob(f"c{ci}_{rep}*"))
            blobs.append((proc.returncode, proc.stdout,
                          [(f.suffix, f.read_bytes()) for f in files]))
        same.append(blobs[0] == blobs[1] and blobs[0][0] == 0)
    ok = all(same)
    _record(10, "CLI determinism", ok, f"{sum(same)}/{len(same)} commands byte-identical",
            time.perf_counter() - t0)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
