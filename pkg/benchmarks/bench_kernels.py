"""Compare the compiled and pure-Python kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel is timed on the same inputs under both backends (best of
``--repeat`` runs) and the largest difference between the two results is
reported next to the timings.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from bibostab import kernels
from bibostab.corpus import random_stable_spec
from bibostab.expint import step_coefficients
from bibostab.quadrature import QuadratureConfig, integrate_abs, truncation_time
from bibostab.spectral import impulse_density


def _cases(rng):
    spec = random_stable_spec(rng, n_max=100, re_range=(-50.0, -0.1))
    while spec.n_modes < 50:
        spec = random_stable_spec(rng, n_max=100, re_range=(-50.0, -0.1))
    decay, gain = step_coefficients(spec.eigenvalues, 0.01)
    gain = gain * spec.b
    w = np.conj(spec.c)
    u = np.sign(rng.normal(size=2001)).astype(np.complex128)
    x = kernels.propagate(decay, gain, u)
    z = rng.normal(size=100_000) * 10.0 ** rng.integers(-8, 8, 100_000)
    dens = impulse_density(spec)
    t_end = truncation_time(dens.coeff_l1, dens.decay_rate)

    def l1(backend):
        f = kernels.modal_abs(dens.rates, dens.weights, backend=backend)
        return integrate_abs(f, t_end, dens.fastest_rate, QuadratureConfig(),
                             float(np.ptp(dens.rates.imag)))[0]

    return {
        f"csum (n={z.size})": lambda b: kernels.csum(z, backend=b),
        f"propagate ({spec.n_modes} modes x {u.size} steps)":
            lambda b: kernels.propagate(decay, gain, u, backend=b),
        f"weighted_mode_sum ({spec.n_modes} x {u.size})":
            lambda b: kernels.weighted_mode_sum(x, w, backend=b),
        f"modal_response ({spec.n_modes} modes x {u.size} steps)":
            lambda b: kernels.modal_response(decay, gain, w, u, backend=b),
        f"L1 norm of density ({dens.rates.size} modes)": l1,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)

    backends = ["python"]
    try:
        kernels._pick("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled extension not available; timing the Python backend only")

    rows = []
    for name, fn in _cases(np.random.default_rng(args.seed)).items():
        times, results = {}, {}
        for b in backends:
            results[b] = fn(b)
            times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
        diff = 0.0
        if len(backends) == 2:
            diff = float(np.max(np.abs(np.asarray(results["cython"]) -
                                       np.asarray(results["python"]))))
        rows.append({"kernel": name, "seconds": times, "max_abs_diff": diff})

    width = max(len(r["kernel"]) for r in rows)
    head = f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) == 2:
        head += f"  {'speedup':>8}  {'max |diff|':>10}"
    print(head)
    for r in rows:
        line = f"{r['kernel']:<{width}}  " + "  ".join(
            f"{r['seconds'][b] * 1e3:>8.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"  {r['seconds']['python'] / r['seconds']['cython']:>7.1f}x"
            line += f"  {r['max_abs_diff']:>10.1e}"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
