"""BIBO stability analysis for linear systems in truncated spectral form."""

__version__ = "0.1.0"

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .kernels import BACKEND
from .spectral import (ImpulseDensity, TransferFn, check_cond_riesz, check_finite_unstable,
                       check_fractional_orders, check_impulse_l1, evaluate_transfer,
                       impulse_density, transfer_difference_check, transfer_function)
from .measure import (BVMeasure, bibo_bound_check, convolve, measure_from_spec,
                      total_variation)
from .laplace import (InversionConfig, Method, halfplane_bound_probe, invert_laplace,
                      laplace_of_measure)
from .simulate import (InputSuite, empirical_bibo_ratio, evaluate_output,
                       laplace_consistency_check, simulate_output, simulate_state)
from .perturbation import (additive_decomposition_check, digamma, perturbed_transfer,
                           verify_counterexample)

__all__ = list(_core_all) + [
    "BACKEND", "ImpulseDensity", "TransferFn", "check_cond_riesz", "check_finite_unstable",
    "check_fractional_orders", "check_impulse_l1", "evaluate_transfer", "impulse_density",
    "transfer_difference_check", "transfer_function", "BVMeasure", "bibo_bound_check",
    "convolve", "measure_from_spec", "total_variation", "InversionConfig", "Method",
    "halfplane_bound_probe", "invert_laplace", "laplace_of_measure", "InputSuite",
    "empirical_bibo_ratio", "evaluate_output", "laplace_consistency_check", "simulate_output",
    "simulate_state", "additive_decomposition_check", "digamma", "perturbed_transfer",
    "verify_counterexample",
]
