"""Independent component analysis with boosted nonparametric source densities.

Each source log-density is grown from the standard normal by boosting
natural cubic smoothing splines; the orthonormal unmixing matrix is updated
by symmetric fixed-point sweeps in between.
"""
__version__ = "0.1.0"

from .density import SourceDensityModel, boost_density, eval_density_model, modified_loglik, partition_sum
from .driver import BicaConfig, SeparationResult, likelihood_scan, rotation, separate
from .errors import *  # noqa: F401,F403
from .fixed_point import fastica_baseline, fixed_point_update
from .grid import Grid, build_grid
from .linalg import WhiteningResult, center, center_whiten, random_orthonormal, sym_decorrelate, whiten
from .metrics import amari, sir
from .spline import SplineWeakLearner, calibrate_lambda, eval_spline, fit_weighted_spline
from .synth import FIXED_MIXING_3X3, SourceSpec, gen_sources, mix, parse_kinds, random_mixing

__all__ = [
    "BicaConfig", "Grid", "FIXED_MIXING_3X3", "SeparationResult", "SourceDensityModel",
    "SourceSpec", "SplineWeakLearner", "WhiteningResult", "amari", "boost_density",
    "build_grid", "calibrate_lambda", "center", "center_whiten", "eval_density_model",
    "eval_spline", "fastica_baseline", "fit_weighted_spline", "fixed_point_update",
    "gen_sources", "likelihood_scan", "mix", "modified_loglik", "parse_kinds",
    "partition_sum", "random_mixing", "random_orthonormal", "rotation", "separate", "sir",
    "sym_decorrelate", "whiten",
]
