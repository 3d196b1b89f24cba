"""Quadratic Value-at-Risk for delta-hedged option portfolios.

The loss quantile of a second-order portfolio model reduces to finding
the radius R of a hyperboloid region whose tail mass under the return
distribution equals the confidence level; V = R^2/2 - theta converts the
radius to currency. This package computes those tail masses (exact
chi-square mixture series where one sign dominates, spherical-radial
Monte Carlo and quadrature for mixed curvature), solves for R, and wraps
the whole flow in a CLI and an HTTP service.
"""

__version__ = "0.1.0"

from .chi2mix import ChiSquareMixture, TailEstimate, chi_square_cdf, mixture_upper_tail
from .errors import (
    AllZeroSpectrum,
    BracketOverflow,
    DimensionMismatch,
    HypervarError,
    InputError,
    InvalidSignature,
    InvariantViolation,
    NoConvergence,
    NoSolution,
    NotPositiveDefinite,
    NumericalError,
    RadialDecayTooSlow,
    SeriesBudgetExceeded,
)
from .hyperboloid import (
    HyperboloidProblem,
    McConfig,
    QuadConfig,
    RadialDensity,
    g_general_elliptic,
    g_normal_mixed,
    g_normal_neg_only,
    g_normal_pos_only,
    inner_tail_h,
    mc_oracle,
    normal_radial_density,
)
from .linalg import SignedSpectrum, build_signed_spectrum, cholesky, sym_eigen
from .pipeline import VarRun, run_covariance, run_gfun, run_var, spectrum_from_inputs
from .portfolio import (
    Greeks,
    Instrument,
    QuadraticModel,
    ReturnSeries,
    bs_greeks,
    build_quadratic_model,
    ewma_covariance,
    returns_from_prices,
)
from .solver import VarResult, solve_r, var_from_r

__all__ = [
    "__version__",
    "ChiSquareMixture",
    "TailEstimate",
    "chi_square_cdf",
    "mixture_upper_tail",
    "HypervarError",
    "InputError",
    "DimensionMismatch",
    "NumericalError",
    "NotPositiveDefinite",
    "NoConvergence",
    "AllZeroSpectrum",
    "SeriesBudgetExceeded",
    "InvalidSignature",
    "RadialDecayTooSlow",
    "NoSolution",
    "BracketOverflow",
    "InvariantViolation",
    "HyperboloidProblem",
    "McConfig",
    "QuadConfig",
    "RadialDensity",
    "normal_radial_density",
    "inner_tail_h",
    "g_normal_neg_only",
    "g_normal_pos_only",
    "g_normal_mixed",
    "g_general_elliptic",
    "mc_oracle",
    "SignedSpectrum",
    "build_signed_spectrum",
    "cholesky",
    "sym_eigen",
    "VarRun",
    "run_var",
    "run_gfun",
    "run_covariance",
    "spectrum_from_inputs",
    "Instrument",
    "Greeks",
    "QuadraticModel",
    "ReturnSeries",
    "bs_greeks",
    "build_quadratic_model",
    "ewma_covariance",
    "returns_from_prices",
    "VarResult",
    "solve_r",
    "var_from_r",
]
