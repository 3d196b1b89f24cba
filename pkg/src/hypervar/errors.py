"""Exception registry shared by every module.

The CLI maps these onto exit codes: input problems exit 2, numerical
failures exit 3, violated internal invariants exit 4.
"""


class HypervarError(Exception):
    """Base class for all package errors."""


class InputError(HypervarError):
    """Malformed or inconsistent user input (files, flags, payloads)."""


class DimensionMismatch(InputError):
    """Operands whose dimensions must agree do not."""


class NumericalError(HypervarError):
    """A computation could not produce a trustworthy result."""


class NotPositiveDefinite(NumericalError):
    """Cholesky pivot fell below tolerance; reports the failing index."""

    def __init__(self, index: int, pivot: float):
        self.index = index
        self.pivot = pivot
        super().__init__(
            f"matrix is not positive definite: pivot {pivot:.3e} at index {index}"
        )


class NoConvergence(NumericalError):
    """An iteration exhausted its budget before reaching tolerance."""


class AllZeroSpectrum(NumericalError):
    """Every eigenvalue was classified as numerically zero."""


class SeriesBudgetExceeded(NumericalError):
    """Mixture series could not reach tolerance within the term cap."""

    def __init__(self, message: str, bound: float):
        self.bound = bound
        super().__init__(f"{message} (remaining-mass bound {bound:.3e})")


class InvalidSignature(NumericalError):
    """Spectrum signature incompatible with the requested evaluator."""


class RadialDecayTooSlow(NumericalError):
    """Radial quadrature tail truncation target unreachable."""


class NoSolution(NumericalError):
    """G(0) < alpha: the tail equation has no root at any R >= 0."""


class BracketOverflow(NumericalError):
    """Root bracketing exceeded the hard upper bound without a sign change."""


class InvariantViolation(HypervarError):
    """An internal consistency guarantee failed; indicates a bug."""


def remediation(exc: HypervarError) -> str:
    """A one-line hint telling the user what usually fixes the error;
    empty when there is nothing generic to suggest."""
    if isinstance(exc, NotPositiveDefinite):
        return (
            "the covariance must be positive definite; look for duplicated "
            "columns, a too-short price history, or rows/columns pasted "
            "out of order"
        )
    if isinstance(exc, SeriesBudgetExceeded):
        return (
            "the eigenvalue magnitudes span too wide a range for the series; "
            "drop near-zero eigenvalues (larger zero tolerance) or use "
            "--method oracle"
        )
    if isinstance(exc, NoSolution):
        return (
            "the tail mass at R = 0 is already below alpha, so no radius "
            "attains it; use a smaller alpha or check the sign of theta and "
            "the curvature inputs"
        )
    if isinstance(exc, BracketOverflow):
        return (
            "no crossing below R = 1e6 usually means alpha is far too small "
            "for this spectrum or the inputs are badly scaled"
        )
    if isinstance(exc, AllZeroSpectrum):
        return (
            "C'GC has no eigenvalue above the zero threshold; the quadratic "
            "term is degenerate, so quadratic VaR does not apply"
        )
    if isinstance(exc, RadialDecayTooSlow):
        return (
            "the radial density decays too slowly for the quadrature map; "
            "use the normal density or a sampling method"
        )
    return ""
