"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
NumPy/SciPy implementation in ``_pykernels`` is used.  Setting the
environment variable ``BIBOSTAB_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("BIBOSTAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def csum(z, backend=None) -> complex:
    """Compensated sum of a complex vector."""
    return _pick(backend).csum(_c(z))


def propagate(decay, gain, u, backend=None) -> np.ndarray:
    """Modal states ``x[n, k+1] = decay[n] x[n, k] + gain[n] u[k]``, ``x[:, 0] = 0``."""
    return _pick(backend).propagate(_c(decay), _c(gain), _c(u))


def weighted_mode_sum(x, w, backend=None) -> np.ndarray:
    """Compensated ``sum_n w[n] x[n, k]`` for every time index ``k``."""
    return _pick(backend).weighted_mode_sum(_c(x), _c(w))


def modal_response(decay, gain, w, u, backend=None) -> np.ndarray:
    """Fused :func:`propagate` and :func:`weighted_mode_sum` without storing states."""
    return _pick(backend).modal_response(_c(decay), _c(gain), _c(w), _c(u))


def modal_abs(rates, weights, backend=None):
    """Scalar callable ``t -> |sum_n weights[n] exp(rates[n] t)|``."""
    return _pick(backend).ModalAbs(_c(rates), _c(weights))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _pykernels
    if backend == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {backend!r}")
