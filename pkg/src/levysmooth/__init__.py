"""Numerical verification of smoothing estimates for Levy transition semigroups."""

from .exceptions import (ConfigError, ConvergenceError, DivergenceError, InadmissibleWeightError,
                         LevySmoothError, QuadratureError, SamplerError)
from .grid import GridFunction, GridSpec, default_grid
from .levy_model import (LevyModel, LogStableMeasure, QWeight, StableMeasure, TabulatedMeasure,
                         ZeroMeasure, jump_symbol, levy_symbol, make_qweight, model_from_dict,
                         stable_constant)
from .paths import RngSeed, sample_batch, sample_endpoints, sample_paths
from .semigroup import semigroup_fourier, semigroup_grid, semigroup_mc, semigroup_square
from .nonlocal_ops import (apply_Aq, apply_Aq_grid, frac_laplacian_singular, frac_laplacian_spectral,
                           iterated_difference)
from .estimators import smoothing_lhs, smoothing_lhs_iterated, weight_estimate_AqPtf
from .perturbed import PerturbedSystem, TimeGrid, duhamel_solve, euler_mc_semigroup, t0_proxy
from .campanato import (ball_average_field, campanato_seminorm, chaining_bound_check,
                        semigroup_modulus_check)
from .reports import EstimateReport, ReportRow, summarize

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "DivergenceError", "InadmissibleWeightError",
    "LevySmoothError", "QuadratureError", "SamplerError",
    "GridFunction", "GridSpec", "default_grid",
    "LevyModel", "LogStableMeasure", "QWeight", "StableMeasure", "TabulatedMeasure", "ZeroMeasure",
    "jump_symbol", "levy_symbol", "make_qweight", "model_from_dict", "stable_constant",
    "RngSeed", "sample_batch", "sample_endpoints", "sample_paths",
    "semigroup_fourier", "semigroup_grid", "semigroup_mc", "semigroup_square",
    "apply_Aq", "apply_Aq_grid", "frac_laplacian_singular", "frac_laplacian_spectral",
    "iterated_difference",
    "smoothing_lhs", "smoothing_lhs_iterated", "weight_estimate_AqPtf",
    "PerturbedSystem", "TimeGrid", "duhamel_solve", "euler_mc_semigroup", "t0_proxy",
    "ball_average_field", "campanato_seminorm", "chaining_bound_check", "semigroup_modulus_check",
    "EstimateReport", "ReportRow", "summarize",
]
