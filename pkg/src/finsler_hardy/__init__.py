"""Numerical laboratory for weighted Finsler trace-Hardy inequalities on the half-space."""
from .constants import LogWeightStack, const_C, const_H, const_K, const_K_theta, log_weights
from .finsler_core import LiftedNorm, NormSpec, WulffShape, polar_decompose, wulff_perimeter
from .ground_state import GroundState, ProblemParams, make_hyper_params
from .hypergeom import classify_case, digamma_fn, gamma_fn, hyp2f1, hyp2f1_derivative
from .quadrature import DomainSpec, QuadratureConfig, QuadratureError, QuadratureResult
from .sweeps import (
    no_Lp_improvement_demo,
    sharpness_K_sweep,
    sharpness_remainder_sweep,
    weight_power_failure_sweep,
)
from .verifier import (
    DeficitReport,
    TestFunction,
    bump_corpus,
    deficit_cone,
    deficit_interpolation,
    deficit_series,
)

__version__ = "0.1.0"

__all__ = [
    "DeficitReport", "DomainSpec", "GroundState", "LiftedNorm", "LogWeightStack", "NormSpec",
    "ProblemParams", "QuadratureConfig", "QuadratureError", "QuadratureResult", "TestFunction",
    "WulffShape", "bump_corpus", "classify_case", "const_C", "const_H", "const_K", "const_K_theta",
    "deficit_cone", "deficit_interpolation", "deficit_series", "digamma_fn", "gamma_fn", "hyp2f1",
    "hyp2f1_derivative", "log_weights", "make_hyper_params", "no_Lp_improvement_demo",
    "polar_decompose", "sharpness_K_sweep", "sharpness_remainder_sweep",
    "weight_power_failure_sweep", "wulff_perimeter",
]
