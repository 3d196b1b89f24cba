"""Root solving for G(R) = alpha and the radius-to-VaR conversion.

The evaluator g passed in must be nonincreasing in R under a fixed seed
(common random numbers make the Monte Carlo estimators deterministic
monotone functions), so plain bracketing applies. The solve runs in
probability space with a residual stopping rule |g(R) - alpha| <= tol,
because G's slope varies by orders of magnitude between spectra while
the meaningful accuracy is probability accuracy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .chi2mix import TailEstimate
from .errors import BracketOverflow, InputError, NoConvergence, NoSolution

BRACKET_LIMIT = 1e6
DEFAULT_TOL = 1e-4
_MAX_REDUCTIONS = 200


@dataclass(frozen=True)
class VarResult:
    """One solved quantile: the radius R with G(R) = alpha and the
    portfolio Value-at-Risk V derived from it."""

    alpha: float
    R: float
    V: float
    g_at_r: float
    iterations: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InputError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.R < 0.0:
            raise InputError(f"R must be >= 0, got {self.R}")


def var_from_r(R: float, theta: float) -> float:
    """V = R^2/2 - theta: radius (squared log-return units) to currency."""
    if R < 0.0:
        raise InputError(f"R must be >= 0, got {R}")
    return R * R / 2.0 - theta


def solve_r(
    alpha: float,
    g: Callable[[float], TailEstimate],
    tol: float = DEFAULT_TOL,
) -> tuple[float, TailEstimate, int]:
    """Find R >= 0 with |g(R) - alpha| <= tol for nonincreasing g.

    Brackets by doubling the upper end from [0, 1] until g crosses below
    alpha, then reduces the interval Brent-style (inverse quadratic /
    secant steps guarded by bisection), stopping on the residual.
    Returns (R, tail estimate at R, number of g evaluations).

    Raises NoSolution if even R = 0 has mass below alpha, and
    BracketOverflow if no crossing is found below R = 1e6.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must be in (0, 1), got {alpha}")
    if tol <= 0.0:
        raise InputError(f"tolerance must be positive, got {tol}")

    evaluations = 0

    def f(r: float) -> tuple[float, TailEstimate]:
        nonlocal evaluations
        est = g(r)
        evaluations += 1
        return est.value - alpha, est

    f_lo, est_lo = f(0.0)
    if abs(f_lo) <= tol:
        return 0.0, est_lo, evaluations
    if f_lo < 0.0:
        raise NoSolution(
            f"g(0) = {est_lo.value:.6g} is already below alpha = {alpha:.6g}; "
            f"no radius achieves the target tail mass"
        )
    lo = 0.0
    hi = 1.0
    f_hi, est_hi = f(hi)
    while f_hi > 0.0 and abs(f_hi) > tol:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        if hi > BRACKET_LIMIT:
            raise BracketOverflow(
                f"no crossing of alpha = {alpha:.6g} found below R = {BRACKET_LIMIT:.0e}"
            )
        f_hi, est_hi = f(hi)
    if abs(f_hi) <= tol:
        return hi, est_hi, evaluations

    # Brent-style reduction on [lo, hi] with f(lo) > 0 > f(hi). Track the
    # best point b and a counterpoint a of opposite sign; prefer
    # interpolation steps, fall back to bisection whenever they leave the
    # bracket or stall.
    a, fa = lo, f_lo
    b, fb = hi, f_hi
    est_b = est_hi
    c, fc = a, fa
    step_prev = b - a
    for _ in range(_MAX_REDUCTIONS):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        mid = 0.5 * (c - b)
        if abs(mid) < 1e-15 * max(1.0, abs(b)):
            raise NoConvergence(
                f"bracket collapsed at R = {b:.12g} with residual {fb:.3e} "
                f"still above tolerance {tol:.1e}"
            )
        use_bisection = True
        if abs(step_prev) > 1e-15 and fa != fb:
            if a != c and fa != fc and fb != fc:
                # Inverse quadratic interpolation through (a, b, c).
                s = (
                    a * fb * fc / ((fa - fb) * (fa - fc))
                    + b * fa * fc / ((fb - fa) * (fb - fc))
                    + c * fa * fb / ((fc - fa) * (fc - fb))
                )
            else:
                s = b - fb * (b - a) / (fb - fa)
            inside = (min(b, c) < s < max(b, c))
            if inside and abs(s - b) < 0.75 * abs(step_prev):
                use_bisection = False
        if use_bisection:
            s = b + mid
        step_prev = s - b
        fs, est_s = f(s)
        if abs(fs) <= tol:
            return s, est_s, evaluations
        a, fa = b, fb
        b, fb, est_b = s, fs, est_s
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
    raise NoConvergence(
        f"residual {fb:.3e} above tolerance {tol:.1e} after "
        f"{_MAX_REDUCTIONS} interval reductions"
    )
