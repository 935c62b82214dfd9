"""Command-line entry point.

Every command reads a JSON system spec (except the perturbation demos) and
writes its result to ``-o/--output`` or standard output.  Reports are JSON
with sorted keys; sampled data are ``t,re,im``-style CSV with 17
significant digits.  Exit status is 0 on success, 1 on bad arguments or
invalid input (an error object is printed to stderr) and 2 when a demo
check fails.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import BiboReport, SpecError, SpectralSystemSpec, Verdict, _json_float, load_spec
from .laplace import InversionConfig, Method, halfplane_bound_probe, invert_laplace
from .measure import read_signal_csv, write_signal_csv
from .perturbation import (CounterexampleConfig, CounterexampleFailure, additive_decomposition,
                           dense_additive_decomposition, mult_demo_curve, verify_counterexample)
from .simulate import DEFAULT_SEED, InputSuite, empirical_bibo_ratio, simulate_output, \
    step_input, tv_bound
from .spectral import (check_cond_riesz, check_finite_unstable, check_fractional_orders,
                       check_impulse_l1, evaluate_transfer, impulse_density, transfer_function)

__all__ = ["RunConfig", "run", "main", "build_parser"]

COMMANDS = ("analyze", "impulse", "transfer", "simulate", "invlap",
            "perturb-demo-mult", "perturb-demo-add")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    spec_path: str | None = None
    signal_path: str | None = None
    dt: float = 0.01
    tmax: float = 10.0
    nodes: int | None = None
    method: str = "bromwich"
    sigma: float | None = None
    omega_max: float = 10.0
    points: int = 101
    seed: int = DEFAULT_SEED
    n_inputs: int = 10
    N: int = 1000
    alpha_tilde: float = 0.0
    alpha_order: float | None = None
    beta_order: float | None = None
    sector: float | None = None
    output_path: str | None = None
    csv_path: str | None = None
    report_path: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise UsageError("--dt must be positive")
        if not (self.tmax > 0 and math.isfinite(self.tmax)):
            raise UsageError("--tmax must be positive")
        if self.n_inputs < 1:
            raise UsageError("--n-inputs must be >= 1")
        if self.N < 1:
            raise UsageError("--N must be >= 1")
        if self.points < 2:
            raise UsageError("--points must be >= 2")
        if (self.alpha_order is None) != (self.beta_order is None):
            raise UsageError("--alpha-order and --beta-order go together")
        if self.command not in ("perturb-demo-mult", "perturb-demo-add") and not self.spec_path:
            raise UsageError(f"{self.command} needs a spec file")


# --- output helpers -------------------------------------------------------

def _num(v, provenance: str) -> dict:
    return {"value": _json_float(v), "provenance": provenance}


def _cnum(z, provenance: str) -> dict:
    z = complex(z)
    return {"re": _json_float(z.real), "im": _json_float(z.imag), "provenance": provenance}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, path: str | None, stdout) -> None:
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _csv_text(writer) -> str:
    buf = io.StringIO()
    writer(buf)
    return buf.getvalue()


def _rows_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(f"{v:.17g}" for v in r) for r in rows]
    return "\n".join(lines) + "\n"


# --- commands -------------------------------------------------------------

def _stage(report: BiboReport, name: str) -> dict:
    d = report.to_dict()
    d["stage"] = name
    return d


def _analyze(cfg: RunConfig, stdout) -> int:
    spec = load_spec(cfg.spec_path)
    stages = []
    final = None
    cascade = [("cond_riesz", lambda: check_cond_riesz(spec)),
               ("finite_unstable", lambda: check_finite_unstable(spec)),
               ("impulse_l1", lambda: check_impulse_l1(spec))]
    if cfg.alpha_order is not None:
        cascade.append(("fractional_orders", lambda: check_fractional_orders(
            spec, cfg.alpha_order, cfg.beta_order, sector=cfg.sector)))
    for name, check in cascade:
        try:
            rep = check()
        except ValueError as exc:
            stages.append({"stage": name, "verdict": "ConditionFailed",
                           "notes": f"{type(exc).__name__}: {exc}"})
            continue
        stages.append(_stage(rep, name))
        final = rep
        if rep.verdict is Verdict.PROVED_BIBO:
            break
    sup, growth = halfplane_bound_probe(transfer_function(spec))
    out = {
        "command": "analyze",
        "n_modes": spec.n_modes,
        "abscissa": _num(spec.abscissa, "closed-form"),
        "result": stages[-1] if final is None else _stage(final, stages[-1]["stage"]),
        "stages": stages,
        "halfplane_probe": {"sup_estimate": _num(sup, "sampled"), "growth": growth.value},
    }
    _emit(_dumps(out), cfg.output_path, stdout)
    return 0


def _impulse(cfg: RunConfig, stdout) -> int:
    spec = load_spec(cfg.spec_path)
    dens = impulse_density(spec)
    t = np.arange(int(round(cfg.tmax / cfg.dt)) + 1) * cfg.dt
    h = np.asarray(dens(t), dtype=np.complex128) if dens.coeff_l1 > 0 else np.zeros(t.size, complex)
    _emit(_rows_csv(("t", "re", "im"), zip(t, h.real, h.imag)), cfg.output_path, stdout)
    return 0


def _transfer(cfg: RunConfig, stdout) -> int:
    spec = load_spec(cfg.spec_path)
    sigma = cfg.sigma if cfg.sigma is not None else max(spec.abscissa, -1.0) + 1.0
    omegas = np.linspace(-cfg.omega_max, cfg.omega_max, cfg.points)
    g = [evaluate_transfer(spec, complex(sigma, w)) for w in omegas]
    rows = ((sigma, w, z.real, z.imag) for w, z in zip(omegas, g))
    _emit(_rows_csv(("sigma", "omega", "re", "im"), rows), cfg.output_path, stdout)
    return 0


def _simulate(cfg: RunConfig, stdout) -> int:
    spec = load_spec(cfg.spec_path)
    u = read_signal_csv(cfg.signal_path) if cfg.signal_path else step_input(cfg.dt, cfg.tmax)
    y = simulate_output(spec, u)
    suite = InputSuite(dt=u.dt, tmax=u.duration, seed=cfg.seed)
    ratio, witness = empirical_bibo_ratio(spec, suite, cfg.n_inputs)
    report = {
        "command": "simulate",
        "max_ratio": _num(ratio, "simulation"),
        "tv_bound": _num(tv_bound(spec), "quadrature"),
        "witness": witness.meta.get("label", ""),
        "n_inputs": cfg.n_inputs,
        "seed": cfg.seed,
        "dt": u.dt,
        "n_samples": len(u),
    }
    csv_text = _csv_text(lambda fh: write_signal_csv(y, fh))
    if cfg.output_path is None and cfg.report_path is None:
        _emit(csv_text, None, stdout)
        sys.stderr.write(_dumps(report))
        return 0
    _emit(csv_text, cfg.output_path, stdout)
    _emit(_dumps(report), cfg.report_path, stdout)
    return 0


def _invlap(cfg: RunConfig, stdout) -> int:
    spec = load_spec(cfg.spec_path)
    strictly_proper = transfer_function(spec).shifted(spec.feedthrough)
    icfg = InversionConfig(method=Method(cfg.method), contour_nodes=cfg.nodes,
                           dt=cfg.dt, tmax=cfg.tmax)
    h = invert_laplace(strictly_proper, icfg)
    _emit(_csv_text(lambda fh: write_signal_csv(h, fh)), cfg.output_path, stdout)
    return 0


def _demo_mult(cfg: RunConfig, stdout) -> int:
    ccfg = CounterexampleConfig(alpha_tilde=cfg.alpha_tilde)
    report = verify_counterexample(cfg.N, ccfg)
    out = {"command": "perturb-demo-mult", "report": _tag_report(report)}
    _emit(_dumps(out), cfg.output_path, stdout)
    if cfg.csv_path:
        sig, g = mult_demo_curve(cfg.alpha_tilde)
        _emit(_rows_csv(("sigma", "re", "im"), zip(sig, g.real, g.imag)), cfg.csv_path, stdout)
    if not report["passed"]:
        failed = sorted(k for k, v in report.items() if isinstance(v, dict) and not v["passed"])
        raise CounterexampleFailure(f"sub-checks failed: {', '.join(failed)}")
    return 0


def _tag_report(obj, key: str = ""):
    """Attach provenance to every float of a counterexample report."""
    if isinstance(obj, dict):
        return {str(k): _tag_report(v, str(k)) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_report(v, key) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if key in ("limit", "s", "sigma", "N"):
            return _json_float(obj)
        prov = "sampled" if key == "sup_estimate" else (
            "closed-form" if key == "observed_rate" else "truncated-sum")
        return _num(obj, prov)
    if isinstance(obj, complex):
        return _cnum(obj, "truncated-sum")
    return obj


def _demo_add(cfg: RunConfig, stdout) -> int:
    n_modes = min(cfg.N, 50)
    n = np.arange(1, n_modes + 1, dtype=float)
    spec_a = SpectralSystemSpec(-n, np.ones(n_modes), np.ones(n_modes))
    p = 0.5 * np.sin(n)
    u = step_input(cfg.dt, cfg.tmax)
    diag = additive_decomposition(spec_a, p, u)
    scalar = additive_decomposition(SpectralSystemSpec([-1.0], [1.0], [1.0]), [-1.0], u)
    rng = np.random.default_rng(cfg.seed)
    m = min(n_modes, 20)
    P = 0.3 * rng.standard_normal((m, m)) / math.sqrt(m)
    dense = dense_additive_decomposition(SpectralSystemSpec(-n[:m], np.ones(m), np.ones(m)), P, u)
    unorm = float(np.max(np.abs(u.samples)))
    tol = 1e-8 * (1.0 + unorm)
    cases = {}
    for name, dec in (("diagonal", diag), ("scalar", scalar), ("dense", dense)):
        cases[name] = {
            "residual": _num(dec.residual, "simulation"),
            "gain_correction": _cnum(dec.gain_correction, "truncated-sum"),
            "transfer_jump": _cnum(dec.transfer_jump, "truncated-sum"),
            "alpha_eval": _cnum(dec.alpha_eval, "closed-form"),
            "passed": bool(dec.residual <= tol),
        }
    passed = all(c["passed"] for c in cases.values())
    out = {"command": "perturb-demo-add", "tolerance": tol, "cases": cases, "passed": passed,
           "dt": cfg.dt, "tmax": cfg.tmax, "seed": cfg.seed}
    _emit(_dumps(out), cfg.output_path, stdout)
    if cfg.csv_path:
        rows = zip(u.times, diag.left.real, diag.left.imag, diag.right.real, diag.right.imag)
        _emit(_rows_csv(("t", "left_re", "left_im", "right_re", "right_im"), rows),
              cfg.csv_path, stdout)
    if not passed:
        raise CounterexampleFailure("additive decomposition residual above tolerance")
    return 0


_HANDLERS = {
    "analyze": _analyze,
    "impulse": _impulse,
    "transfer": _transfer,
    "simulate": _simulate,
    "invlap": _invlap,
    "perturb-demo-mult": _demo_mult,
    "perturb-demo-add": _demo_add,
}


def _error(kind: str, message: str, stderr) -> None:
    stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        return _HANDLERS[cfg.command](cfg, stdout)
    except AssertionError as exc:
        _error(type(exc).__name__, str(exc), stderr)
        return 2
    except (SpecError, ValueError, OSError, ArithmeticError) as exc:
        _error(type(exc).__name__, str(exc), stderr)
        return 1


# --- argument parsing -----------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bibostab", description="BIBO stability toolbox for spectral systems")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("spec", help="JSON system spec")
        sp.add_argument("-o", "--output", help="output file (default: stdout)")
        return sp

    a = common(sub.add_parser("analyze", help="run the sufficient-condition cascade"))
    a.add_argument("--alpha-order", type=float)
    a.add_argument("--beta-order", type=float)
    a.add_argument("--sector", type=float)

    i = common(sub.add_parser("impulse", help="sample the impulse density"))
    i.add_argument("--dt", type=float, default=0.01)
    i.add_argument("--tmax", type=float, default=10.0)

    t = common(sub.add_parser("transfer", help="sample G on a vertical line"))
    t.add_argument("--sigma", type=float)
    t.add_argument("--omega-max", type=float, default=10.0)
    t.add_argument("--points", type=int, default=101)

    s = common(sub.add_parser("simulate", help="simulate and estimate the BIBO gain"))
    s.add_argument("--signal", help="input CSV (t,re,im); default: unit step")
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--tmax", type=float, default=10.0)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--n-inputs", type=int, default=10)
    s.add_argument("--report", help="ratio JSON file")

    v = common(sub.add_parser("invlap", help="numerically invert G minus feedthrough"))
    v.add_argument("--method", choices=[m.value for m in Method], default="bromwich")
    v.add_argument("--nodes", type=int)
    v.add_argument("--dt", type=float, default=0.01)
    v.add_argument("--tmax", type=float, default=10.0)

    def demo_mult(sp):
        common(sp, spec=False)
        sp.add_argument("--N", type=int, default=1000)
        sp.add_argument("--alpha-tilde", type=float, default=0.0)
        sp.add_argument("--csv", help="CSV of G~ along the real axis")
        return sp

    def demo_add(sp):
        common(sp, spec=False)
        sp.add_argument("--N", type=int, default=50)
        sp.add_argument("--dt", type=float, default=1e-3)
        sp.add_argument("--tmax", type=float, default=10.0)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--csv", help="CSV of both sides for the diagonal case")
        return sp

    demo_mult(sub.add_parser("perturb-demo-mult", help="multiplicative counterexample"))
    demo_add(sub.add_parser("perturb-demo-add", help="additive decomposition"))
    pert = sub.add_parser("perturb", help="perturbation demos")
    psub = pert.add_subparsers(dest="demo", parser_class=_Parser)
    demo_mult(psub.add_parser("demo-mult"))
    demo_add(psub.add_parser("demo-add"))
    return p


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    command = ns.command
    if command is None:
        raise UsageError("no command given")
    if command == "perturb":
        if ns.demo is None:
            raise UsageError("perturb needs demo-mult or demo-add")
        command = f"perturb-{ns.demo}"
    get = lambda name, default=None: getattr(ns, name, default)  # noqa: E731
    kwargs = dict(
        command=command, spec_path=get("spec"), signal_path=get("signal"),
        output_path=get("output"), csv_path=get("csv"), report_path=get("report"),
        nodes=get("nodes"), method=get("method", "bromwich"), sigma=get("sigma"),
        omega_max=get("omega_max", 10.0), points=get("points", 101),
        seed=get("seed", DEFAULT_SEED), n_inputs=get("n_inputs", 10),
        alpha_tilde=get("alpha_tilde", 0.0), alpha_order=get("alpha_order"),
        beta_order=get("beta_order"), sector=get("sector"),
    )
    for name in ("dt", "tmax", "N"):
        if get(name) is not None:
            kwargs[name] = get(name)
    return RunConfig(**kwargs)


def main(argv=None) -> int:
    try:
        cfg = _config_from_args(build_parser().parse_args(argv))
    except UsageError as exc:
        _error("UsageError", str(exc), sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
