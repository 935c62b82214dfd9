"""Domain types shared by every analysis: truncated spectral systems, sampled
signals, half-planes and stability reports.

Systems are stored in diagonal coordinates only.  Mode ``n`` has eigenvalue
``eigenvalues[n]``, input coefficient ``b[n]`` and output coefficient
``c[n]``; its contribution to the transfer function is
``b[n] * conj(c[n]) / (s - eigenvalues[n])``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

__all__ = [
    "EMPTY_ABSCISSA",
    "SpecError",
    "LengthMismatch",
    "NonFiniteEntry",
    "OutsideDomain",
    "PoleHit",
    "UnstableMode",
    "TailModel",
    "SpectralSystemSpec",
    "Signal",
    "HalfPlane",
    "Verdict",
    "Condition",
    "BiboReport",
    "validate_spec",
    "sup_norm",
    "spec_from_dict",
    "spec_to_dict",
    "load_spec",
]

#: Abscissa reported for a system without modes.
EMPTY_ABSCISSA = -1e300


class SpecError(ValueError):
    """Base class for invalid input data."""


class LengthMismatch(SpecError):
    pass


class NonFiniteEntry(SpecError):
    pass


class OutsideDomain(ValueError):
    """A point lies outside the half-plane where a function is analytic."""


class PoleHit(ValueError):
    pass


class UnstableMode(ValueError):
    """A contributing mode has a nonnegative real part."""


@dataclass(frozen=True)
class TailModel:
    """Closed-form description of the modes beyond the truncation.

    ``kind`` is one of

    ``"none"``
        No claim about the infinite system.
    ``"power-law"``
        Mode ``n > N`` has eigenvalue ``-a * n**p`` and coefficient moduli
        ``|b_n| = b_abs`` and ``|c_n| = c_abs``.
    ``"bound"``
        ``value`` bounds ``sum_{n > N} |b_n c_n / Re(lambda_n)|``.
    """

    kind: str = "none"
    a: float = 1.0
    p: float = 1.0
    b_abs: float = 1.0
    c_abs: float = 1.0
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "power-law", "bound"):
            raise SpecError(f"unknown tail model kind {self.kind!r}")
        for name in ("a", "p", "b_abs", "c_abs", "value"):
            if not math.isfinite(getattr(self, name)):
                raise NonFiniteEntry(f"tail model field {name} is not finite")
        if self.kind == "power-law" and not (self.a > 0 and self.p > 0):
            raise SpecError("power-law tail needs a > 0 and p > 0")
        if self.kind == "bound" and self.value < 0:
            raise SpecError("tail bound must be nonnegative")

    def riesz_tail(self, n_modes: int) -> float:
        """Upper bound for ``sum_{n > n_modes} |b_n c_n / Re(lambda_n)|``.

        Returns ``inf`` when the tail series diverges and ``0`` for ``"none"``.
        """
        if self.kind == "none":
            return 0.0
        if self.kind == "bound":
            return self.value
        scale = self.b_abs * self.c_abs / self.a
        if scale == 0.0:
            return 0.0
        if self.p <= 1.0:
            return math.inf
        # sum_{n > N} n^-p <= int_N^inf x^-p dx; for N = 0 the n = 1 term is added separately
        if n_modes == 0:
            return scale * (1.0 + 1.0 / (self.p - 1.0))
        return scale / ((self.p - 1.0) * n_modes ** (self.p - 1.0))

    def to_dict(self) -> dict:
        if self.kind == "none":
            return {"kind": "none"}
        if self.kind == "bound":
            return {"kind": "bound", "value": self.value}
        return {"kind": "power-law", "a": self.a, "p": self.p,
                "b_abs": self.b_abs, "c_abs": self.c_abs}


def _as_complex_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralSystemSpec:
    """Truncated Riesz-spectral system in diagonal coordinates.

    Parameters
    ----------
    eigenvalues, b, c : array_like of complex, length N
        Eigenvalues and input/output coefficients of the retained modes.
    feedthrough : complex
        Additive constant of the transfer function.
    tail : TailModel
        Description of the modes that were truncated away.
    """

    eigenvalues: np.ndarray
    b: np.ndarray
    c: np.ndarray
    feedthrough: complex = 0.0
    tail: TailModel = field(default_factory=TailModel)

    def __post_init__(self):
        lam = _as_complex_array(self.eigenvalues, "eigenvalues")
        b = _as_complex_array(self.b, "b")
        c = _as_complex_array(self.c, "c")
        if not (lam.size == b.size == c.size):
            raise LengthMismatch(
                f"eigenvalues/b/c lengths differ: {lam.size}, {b.size}, {c.size}")
        ft = complex(self.feedthrough)
        if not (math.isfinite(ft.real) and math.isfinite(ft.imag)):
            raise NonFiniteEntry("feedthrough is not finite")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "feedthrough", ft)
        if self.tail is None:
            object.__setattr__(self, "tail", TailModel())
        weights = b * np.conj(c)
        weights.setflags(write=False)
        object.__setattr__(self, "_weights", weights)
        abscissa = float(np.max(lam.real)) if lam.size else EMPTY_ABSCISSA
        object.__setattr__(self, "_abscissa", abscissa)

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def abscissa(self) -> float:
        """Growth abscissa ``max Re(lambda_n)``."""
        return self._abscissa

    @property
    def weights(self) -> np.ndarray:
        """Residues ``b_n * conj(c_n)`` of the transfer function."""
        return self._weights

    def with_(self, **changes) -> "SpectralSystemSpec":
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, SpectralSystemSpec):
            return NotImplemented
        return (np.array_equal(self.eigenvalues, other.eigenvalues)
                and np.array_equal(self.b, other.b)
                and np.array_equal(self.c, other.c)
                and self.feedthrough == other.feedthrough
                and self.tail == other.tail)

    def __repr__(self):
        return (f"SpectralSystemSpec(n_modes={self.n_modes}, "
                f"abscissa={self.abscissa:g}, feedthrough={self.feedthrough!r}, "
                f"tail={self.tail.kind!r})")


def validate_spec(spec) -> SpectralSystemSpec:
    """Return a validated :class:`SpectralSystemSpec`.

    Accepts an existing spec (returned unchanged, so the call is idempotent)
    or a mapping in the JSON schema of :func:`spec_from_dict`.  Raises
    :class:`LengthMismatch` or :class:`NonFiniteEntry`.
    """
    if isinstance(spec, SpectralSystemSpec):
        return spec
    if isinstance(spec, dict):
        return spec_from_dict(spec)
    raise TypeError(f"cannot validate object of type {type(spec).__name__}")


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples on the uniform grid ``t_k = k * dt``, held constant on
    ``[t_k, t_{k+1})``.

    ``samples`` has shape ``(K,)`` for scalar signals or ``(K, d)`` for
    vector-valued ones.  ``meta`` carries free-form annotations (labels,
    snap errors) and does not take part in comparisons.
    """

    dt: float
    samples: np.ndarray
    t0: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise SpecError("dt must be positive and finite")
        if self.t0 != 0.0:
            raise SpecError("signals start at t = 0")
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.ndim not in (1, 2):
            raise SpecError("samples must be 1-D or 2-D")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntry("signal samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return self.dt * max(len(self) - 1, 0)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self))

    def sup_norm(self) -> float:
        return sup_norm(self)

    def scaled(self, k: complex) -> "Signal":
        return Signal(self.dt, k * self.samples)

    @classmethod
    def from_function(cls, func, dt: float, tmax: float) -> "Signal":
        n = int(round(tmax / dt)) + 1
        t = dt * np.arange(n)
        return cls(dt, np.asarray(func(t), dtype=np.complex128) * np.ones(n))

    @classmethod
    def constant(cls, value: complex, dt: float, tmax: float) -> "Signal":
        n = int(round(tmax / dt)) + 1
        return cls(dt, np.full(n, value, dtype=np.complex128))


def sup_norm(sig: Signal) -> float:
    """Largest sample modulus (componentwise max for vector signals)."""
    s = sig.samples
    if s.size == 0:
        return 0.0
    return float(np.max(np.abs(s)))


@dataclass(frozen=True)
class HalfPlane:
    """Open half-plane ``Re s > abscissa``."""

    abscissa: float

    def __post_init__(self):
        if not math.isfinite(self.abscissa):
            raise NonFiniteEntry("half-plane abscissa must be finite")

    def __contains__(self, s) -> bool:
        return complex(s).real > self.abscissa


class Verdict(str, enum.Enum):
    PROVED_BIBO = "ProvedBibo"
    CONDITION_FAILED = "ConditionFailed"
    INCONCLUSIVE = "Inconclusive"


class Condition(str, enum.Enum):
    COND_RIESZ = "CondRiesz"
    FINITE_UNSTABLE_EXT = "FiniteUnstableExt"
    IMPULSE_L1 = "ImpulseL1"
    FRACTIONAL_ORDERS = "FractionalOrders"
    TRANSFER_CONSTANT = "TransferConstant"


@dataclass
class BiboReport:
    """Outcome of one sufficient-condition check.

    ``bound`` is an upper estimate of the total variation of the impulse
    response; it is always present when the verdict is ``ProvedBibo``.
    ``details`` holds extra numbers, each as ``{"value", "provenance"}``.
    """

    verdict: Verdict
    condition_used: Condition
    bound: float | None = None
    tail_bound: float | None = None
    empirical_ratio: float | None = None
    notes: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is Verdict.PROVED_BIBO:
            if self.bound is None or not math.isfinite(self.bound):
                raise ValueError("a ProvedBibo report needs a finite bound")

    @property
    def proved(self) -> bool:
        return self.verdict is Verdict.PROVED_BIBO

    def to_dict(self) -> dict:
        def num(v, prov):
            if v is None:
                return None
            return {"value": _json_float(v), "provenance": prov}

        bound_prov = "closed-form" if self.condition_used is Condition.TRANSFER_CONSTANT \
            else ("quadrature" if self.condition_used in
                  (Condition.IMPULSE_L1, Condition.FRACTIONAL_ORDERS) else "truncated-sum")
        return {
            "verdict": self.verdict.value,
            "condition_used": self.condition_used.value,
            "bound": num(self.bound, bound_prov),
            "tail_bound": num(self.tail_bound, "tail-bound"),
            "empirical_ratio": num(self.empirical_ratio, "simulation"),
            "notes": self.notes,
            "details": {k: {"value": _json_float(v[0]), "provenance": v[1]}
                        for k, v in sorted(self.details.items())},
        }


def _json_float(v):
    v = float(v)
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def _complex_from_json(obj, name: str) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    try:
        return complex(float(obj["re"]), float(obj.get("im", 0.0)))
    except (TypeError, KeyError, ValueError) as exc:
        raise SpecError(f"{name}: expected {{'re':..,'im':..}}") from exc


def _complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def spec_from_dict(data: dict) -> SpectralSystemSpec:
    """Build a spec from the JSON schema::

        {"eigenvalues": [{"re": -1.0, "im": 0.0}, ...],
         "b": [...], "c": [...],
         "feedthrough": {"re": 0.0, "im": 0.0},
         "tail": {"kind": "none"}}
    """
    if not isinstance(data, dict):
        raise SpecError("system spec must be a JSON object")
    missing = [k for k in ("eigenvalues", "b", "c") if k not in data]
    if missing:
        raise SpecError(f"missing keys: {', '.join(missing)}")
    lists = {}
    for key in ("eigenvalues", "b", "c"):
        seq = data[key]
        if not isinstance(seq, list):
            raise SpecError(f"{key} must be a list")
        lists[key] = [_complex_from_json(v, f"{key}[{i}]") for i, v in enumerate(seq)]
    ft = _complex_from_json(data.get("feedthrough", 0.0), "feedthrough")
    tail_data = dict(data.get("tail") or {"kind": "none"})
    kind = tail_data.pop("kind", "none")
    try:
        tail = TailModel(kind=kind, **{k: float(v) for k, v in tail_data.items()})
    except TypeError as exc:
        raise SpecError(f"bad tail model: {exc}") from exc
    return SpectralSystemSpec(lists["eigenvalues"], lists["b"], lists["c"], ft, tail)


def spec_to_dict(spec: SpectralSystemSpec) -> dict:
    return {
        "eigenvalues": [_complex_to_json(z) for z in spec.eigenvalues],
        "b": [_complex_to_json(z) for z in spec.b],
        "c": [_complex_to_json(z) for z in spec.c],
        "feedthrough": _complex_to_json(spec.feedthrough),
        "tail": spec.tail.to_dict(),
    }


def load_spec(path) -> SpectralSystemSpec:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
    return spec_from_dict(data)


def as_complex_array(values: Sequence[Any]) -> np.ndarray:
    return np.asarray(values, dtype=np.complex128).reshape(-1)
