"""Bandwidth selection for univariate kernel density estimation.

Implements indirect cross-validation (cross-validate with a two-parameter
selection kernel, rescale for the Gaussian estimation kernel), classic
least-squares cross-validation, a local (pointwise) ICV variant with spline
bandwidth profiles, and a Monte Carlo study harness built on exact
normal-mixture ISE/MISE arithmetic.
"""

from .errors import (
    DegenerateDataError,
    DegenerateKernelError,
    InsufficientDataError,
    OptimizationFailureError,
    ProfileFailureError,
)
from .mixtures import (
    GaussianCombination,
    NormalMixture,
    RoughnessSet,
    MARRON_WAND_NAMES,
    amise_bandwidth,
    exact_mise,
    gaussian_derivative_overlap,
    inner_product,
    l2_distance_sq,
    marron_wand_density,
)
from .kernels import GAUSSIAN_ROUGHNESS, KernelFamily, KernelMoments, SelectionKernel
from .crossval import (
    BandwidthReport,
    CriterionCurve,
    PairwiseDistances,
    density_estimate,
    lscv,
    minimize_curve,
    oversmoothed_bandwidth,
    select_icv,
    select_icv_star,
    select_lscv,
)
from .paramodel import (
    ASYMPTOTIC_OPTIMAL_ALPHA,
    MODEL_RANGE,
    ParamChoice,
    asymptotic_mse,
    model_params,
    mse_optimal_params,
    optimal_sigma,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateDataError",
    "DegenerateKernelError",
    "InsufficientDataError",
    "OptimizationFailureError",
    "ProfileFailureError",
    "GaussianCombination",
    "NormalMixture",
    "RoughnessSet",
    "MARRON_WAND_NAMES",
    "amise_bandwidth",
    "exact_mise",
    "gaussian_derivative_overlap",
    "inner_product",
    "l2_distance_sq",
    "marron_wand_density",
    "GAUSSIAN_ROUGHNESS",
    "KernelFamily",
    "KernelMoments",
    "SelectionKernel",
    "BandwidthReport",
    "CriterionCurve",
    "PairwiseDistances",
    "density_estimate",
    "lscv",
    "minimize_curve",
    "oversmoothed_bandwidth",
    "select_icv",
    "select_icv_star",
    "select_lscv",
    "ASYMPTOTIC_OPTIMAL_ALPHA",
    "MODEL_RANGE",
    "ParamChoice",
    "asymptotic_mse",
    "model_params",
    "mse_optimal_params",
    "optimal_sigma",
    "__version__",
]
