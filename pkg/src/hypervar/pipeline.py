"""End-to-end runs shared by the command line and the HTTP service.

A run starts from (sigma, gamma1, theta) — either given directly or
built from instruments and prices — factors sigma, splits the spectrum
of C' gamma1 C by sign, routes to the matching tail evaluator, solves
G(R) = alpha for each requested alpha, and assembles the report with a
fixed key order so identical runs serialize byte-identically.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chi2mix import TailEstimate
from .errors import InputError
from .hyperboloid import (
    McConfig,
    QuadConfig,
    g_general_elliptic,
    g_normal_mixed,
    g_normal_neg_only,
    g_normal_pos_only,
    mc_oracle,
)
from .linalg import SignedSpectrum, build_signed_spectrum, cholesky, sym_eigen, validate_symmetric
from .portfolio import ewma_covariance, returns_from_prices
from .solver import DEFAULT_TOL, solve_r, var_from_r

METHODS = ("auto", "neg-only", "pos-only", "mixed", "general", "oracle")
_MC_METHODS = ("mixed", "general", "oracle")


@dataclass(frozen=True)
class VarRun:
    """One VaR request: the quadratic model plus solve and budget knobs."""

    sigma: np.ndarray = field(repr=False)
    gamma1: np.ndarray = field(repr=False)
    theta: float = 0.0
    alphas: tuple[float, ...] = (0.05,)
    seed: int = 0
    samples_per_replicate: int = 100000
    replicates: int = 32
    antithetic: bool = True
    tolerance: float = DEFAULT_TOL
    method: str = "auto"

    def __post_init__(self):
        if not self.alphas:
            raise InputError("need at least one alpha")
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                raise InputError(f"alpha must be in (0, 1), got {a}")
        if self.method not in METHODS:
            raise InputError(
                f"method must be one of {', '.join(METHODS)}, got {self.method!r}"
            )
        if self.tolerance <= 0:
            raise InputError(f"tolerance must be positive, got {self.tolerance}")


def spectrum_from_inputs(sigma: np.ndarray, gamma1: np.ndarray) -> SignedSpectrum:
    """Factor sigma and split the eigenvalues of C' gamma1 C by sign."""
    return build_signed_spectrum(cholesky(sigma), gamma1)


def classify_signature(spectrum: SignedSpectrum) -> str:
    if spectrum.n_plus == 0:
        return "neg-only"
    if spectrum.n_minus == 0:
        return "pos-only"
    return "mixed"


def resolve_method(method: str, spectrum: SignedSpectrum) -> str:
    """Turn 'auto' into the signature's natural route and reject forced
    routes incompatible with the spectrum."""
    if method == "auto":
        return classify_signature(spectrum)
    if method == "neg-only" and spectrum.n_plus > 0:
        raise InputError(
            f"method neg-only requires a spectrum without positive eigenvalues; "
            f"this one has {spectrum.n_plus}"
        )
    if method == "pos-only" and spectrum.n_minus > 0:
        raise InputError(
            f"method pos-only requires a spectrum without negative eigenvalues; "
            f"this one has {spectrum.n_minus}"
        )
    if method in ("mixed", "general") and (
        spectrum.n_plus == 0 or spectrum.n_minus == 0
    ):
        raise InputError(
            f"method {method} requires eigenvalues of both signs; this spectrum "
            f"has n_plus={spectrum.n_plus}, n_minus={spectrum.n_minus}"
        )
    return method


def make_evaluator(
    route: str,
    spectrum: SignedSpectrum,
    mc_cfg: McConfig,
    quad_cfg: Optional[QuadConfig] = None,
) -> Callable[[float], TailEstimate]:
    """The G(R) evaluator for a resolved route. For pos-only this is the
    lower-tail variant P(Q_plus <= R^2), which increases in R; all other
    routes return the nonincreasing G."""
    if route == "neg-only":
        return lambda r: g_normal_neg_only(r, spectrum.d_minus)
    if route == "pos-only":
        return lambda r: g_normal_pos_only(r, spectrum.d_plus)
    if route == "mixed":
        return lambda r: g_normal_mixed(r, spectrum, mc_cfg)
    if route == "general":
        cfg = quad_cfg if quad_cfg is not None else QuadConfig(seed=mc_cfg.seed)
        return lambda r: g_general_elliptic(r, spectrum, None, cfg)
    if route == "oracle":
        return lambda r: mc_oracle(r, spectrum, mc_cfg)
    raise InputError(f"unknown method {route!r}")


def _effective_tolerance(
    route: str, evaluator: Callable[[float], TailEstimate], tol: float
) -> float:
    """Deterministic routes solve to the requested tolerance; sampling
    routes cannot resolve below their own noise, so the tolerance is
    floored at half the standard error measured at a probe radius."""
    if route not in _MC_METHODS:
        return tol
    probe = evaluator(1.0)
    return max(tol, 0.5 * probe.standard_error)


def _solve_one(
    alpha: float,
    route: str,
    evaluator: Callable[[float], TailEstimate],
    theta: float,
    tol: float,
    spectrum: SignedSpectrum,
) -> dict:
    if route == "pos-only":
        # The evaluator increases from 0 to 1; solve the nonincreasing
        # complement and flip back. The region sign also flips the
        # radius-to-VaR identity to V = -R^2/2 - theta.
        def complement(r: float) -> TailEstimate:
            est = evaluator(r)
            return TailEstimate(
                value=min(max(1.0 - est.value, 0.0), 1.0),
                standard_error=est.standard_error,
                method=est.method,
                evaluations=est.evaluations,
            )

        radius, est, iterations = solve_r(1.0 - alpha, complement, tol)
        g_at_r = 1.0 - est.value
        value = -radius * radius / 2.0 - theta
    else:
        radius, est, iterations = solve_r(alpha, evaluator, tol)
        g_at_r = est.value
        value = var_from_r(radius, theta)
    return {
        "alpha": alpha,
        "R": radius,
        "V": value,
        "gAtR": g_at_r,
        "standardError": est.standard_error,
        "method": route,
        "nPlus": spectrum.n_plus,
        "nMinus": spectrum.n_minus,
    }


def run_var(run: VarRun) -> dict:
    """Solve G(R) = alpha for every alpha and assemble the report.

    Alphas are solved concurrently (they share cached draws and tables)
    and reported in descending order.
    """
    sigma = validate_symmetric(run.sigma)
    gamma1 = validate_symmetric(run.gamma1)
    spectrum = spectrum_from_inputs(sigma, gamma1)
    route = resolve_method(run.method, spectrum)
    mc_cfg = McConfig(
        seed=run.seed,
        replicates=run.replicates,
        samples_per_replicate=run.samples_per_replicate,
        antithetic=run.antithetic,
    )
    evaluator = make_evaluator(route, spectrum, mc_cfg)
    if route == "mixed":
        evaluator(0.0)  # build the shared table and draws before fanning out
    tol = _effective_tolerance(route, evaluator, run.tolerance)
    alphas = sorted(run.alphas, reverse=True)
    if len(alphas) == 1:
        entries = [_solve_one(alphas[0], route, evaluator, run.theta, tol, spectrum)]
    else:
        with ThreadPoolExecutor(max_workers=min(len(alphas), 8)) as pool:
            futures = [
                pool.submit(
                    _solve_one, alpha, route, evaluator, run.theta, tol, spectrum
                )
                for alpha in alphas
            ]
            entries = [f.result() for f in futures]
    return {
        "results": entries,
        "config": {
            "theta": run.theta,
            "alphas": alphas,
            "seed": run.seed,
            "samplesPerReplicate": run.samples_per_replicate,
            "replicates": run.replicates,
            "antithetic": run.antithetic,
            "tolerance": run.tolerance,
            "method": run.method,
        },
    }


def run_gfun(
    sigma: np.ndarray,
    gamma1: np.ndarray,
    r_values: tuple[float, ...],
    method: str = "auto",
    seed: int = 0,
    samples_per_replicate: int = 100000,
    replicates: int = 32,
    antithetic: bool = True,
) -> dict:
    """Evaluate the routed tail function at each requested radius."""
    if not r_values:
        raise InputError("need at least one R value")
    for r in r_values:
        if r < 0:
            raise InputError(f"R must be >= 0, got {r}")
    if method not in METHODS:
        raise InputError(f"method must be one of {', '.join(METHODS)}, got {method!r}")
    spectrum = spectrum_from_inputs(validate_symmetric(sigma), validate_symmetric(gamma1))
    route = resolve_method(method, spectrum)
    mc_cfg = McConfig(
        seed=seed,
        replicates=replicates,
        samples_per_replicate=samples_per_replicate,
        antithetic=antithetic,
    )
    evaluator = make_evaluator(route, spectrum, mc_cfg)
    points = []
    for r in r_values:
        est = evaluator(float(r))
        points.append(
            {
                "R": float(r),
                "G": est.value,
                "standardError": est.standard_error,
            }
        )
    return {
        "points": points,
        "config": {
            "seed": seed,
            "samplesPerReplicate": samples_per_replicate,
            "replicates": replicates,
            "antithetic": antithetic,
            "method": method,
            "route": route,
            "nPlus": spectrum.n_plus,
            "nMinus": spectrum.n_minus,
        },
    }


def run_covariance(
    tickers: tuple[str, ...], prices: np.ndarray, lam: float
) -> dict:
    """EWMA covariance of the log-returns of a close-price table."""
    series = returns_from_prices(tickers, prices)
    sigma = ewma_covariance(series, lam)
    values, _ = sym_eigen(sigma)
    return {
        "sigma": sigma,
        "dimension": int(sigma.shape[0]),
        "smallestEigenvalue": float(values[0]),
    }
