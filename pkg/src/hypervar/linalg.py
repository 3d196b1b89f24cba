"""Dense symmetric linear algebra for small matrices.

Provides a lower Cholesky factorization, a cyclic Jacobi symmetric
eigensolver, and the assembly of the signed spectrum (positive and
negative eigenvalue groups of C'GC) that defines a hyperboloid tail
problem. Algorithms are written out explicitly so they can be checked
against an independent solver in tests; numpy supplies only array
storage and arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroSpectrum,
    DimensionMismatch,
    InputError,
    NoConvergence,
    NotPositiveDefinite,
)

JACOBI_SWEEP_BUDGET = 100
JACOBI_OFF_NORM_FACTOR = 1e-14
CHOLESKY_PIVOT_FACTOR = 1e-14
ZERO_EIGENVALUE_TOL = 1e-10
SYMMETRY_RTOL = 1e-12


def validate_symmetric(a: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Check symmetry within a relative tolerance and return the exactly
    symmetrized (averaged) copy. Raises InputError on shape or symmetry
    violations."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise InputError("matrix must have dimension >= 1")
    scale = np.abs(a).max()
    skew = np.abs(a - a.T).max()
    if skew > rtol * max(scale, 1e-300):
        raise InputError(
            f"matrix is not symmetric: max |a - a'| = {skew:.3e} "
            f"exceeds {rtol:.0e} relative to max |entry| = {scale:.3e}"
        )
    return 0.5 * (a + a.T)


def cholesky(sigma: np.ndarray) -> np.ndarray:
    """Lower-triangular factor C with C C' = sigma.

    The pivot tolerance is relative (n * 1e-14 * max diagonal entry) so
    that rescaling the input does not change which matrices are accepted.
    """
    a = validate_symmetric(sigma)
    n = a.shape[0]
    tol = n * CHOLESKY_PIVOT_FACTOR * max(float(a.diagonal().max()), 0.0)
    low = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - low[j, :j] @ low[j, :j]
        if pivot <= tol:
            raise NotPositiveDefinite(j, float(pivot))
        low[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def sym_eigen(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi
    rotations.

    Returns (eigenvalues ascending, orthogonal basis) with
    basis @ diag(eigenvalues) @ basis' reconstructing the input. Sweeps
    stop once the off-diagonal Frobenius norm falls below
    1e-14 * ||a||_F; exceeding the sweep budget raises NoConvergence.
    """
    work = validate_symmetric(a, rtol=1e-8).copy()
    n = work.shape[0]
    basis = np.eye(n)
    threshold = JACOBI_OFF_NORM_FACTOR * np.sqrt((work * work).sum())
    for _ in range(JACOBI_SWEEP_BUDGET):
        off = work - np.diag(work.diagonal())
        if np.sqrt((off * off).sum()) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = work[p, :].copy()
                rq = work[q, :].copy()
                work[p, :] = c * rp - s * rq
                work[q, :] = s * rp + c * rq
                cp = work[:, p].copy()
                cq = work[:, q].copy()
                work[:, p] = c * cp - s * cq
                work[:, q] = s * cp + c * cq
                work[p, q] = 0.0
                work[q, p] = 0.0
                bp = basis[:, p].copy()
                bq = basis[:, q].copy()
                basis[:, p] = c * bp - s * bq
                basis[:, q] = s * bp + c * bq
    else:
        raise NoConvergence(
            f"Jacobi sweeps exhausted ({JACOBI_SWEEP_BUDGET}) before the "
            f"off-diagonal norm reached tolerance"
        )
    values = work.diagonal().copy()
    order = np.argsort(values, kind="stable")
    return values[order], basis[:, order]


@dataclass(frozen=True)
class SignedSpectrum:
    """Eigen-data of C'GC split by sign.

    d_plus holds the positive eigenvalues ascending; d_minus holds the
    magnitudes of the negative eigenvalues ascending; basis is the
    orthogonal eigenvector matrix; zero_count is the number of
    eigenvalues dropped as numerically zero.
    """

    d_plus: tuple[float, ...]
    d_minus: tuple[float, ...]
    basis: np.ndarray = field(repr=False)
    zero_count: int = 0

    def __post_init__(self):
        if any(v <= 0 for v in self.d_plus) or any(v <= 0 for v in self.d_minus):
            raise InputError("signed spectrum weights must be strictly positive")
        n = self.basis.shape[0]
        if len(self.d_plus) + len(self.d_minus) + self.zero_count != n:
            raise DimensionMismatch(
                "spectrum split sizes do not add up to the matrix dimension"
            )
        residual = np.abs(self.basis.T @ self.basis - np.eye(n)).max()
        if residual > 1e-10:
            raise InputError(f"basis is not orthogonal (residual {residual:.3e})")

    @property
    def n_plus(self) -> int:
        return len(self.d_plus)

    @property
    def n_minus(self) -> int:
        return len(self.d_minus)


def build_signed_spectrum(
    c: np.ndarray, gamma1: np.ndarray, zero_tol: float = ZERO_EIGENVALUE_TOL
) -> SignedSpectrum:
    """Eigendecompose M = c' gamma1 c and classify eigenvalues by sign.

    Eigenvalues with |lambda| <= zero_tol * max |lambda| are dropped as
    numerically zero; if everything is dropped the quadratic model is
    degenerate and AllZeroSpectrum is raised.
    """
    c = np.asarray(c, dtype=float)
    gamma1 = validate_symmetric(gamma1)
    if c.shape != gamma1.shape:
        raise DimensionMismatch(
            f"factor shape {c.shape} does not match curvature shape {gamma1.shape}"
        )
    m = c.T @ gamma1 @ c
    values, basis = sym_eigen(0.5 * (m + m.T))
    radius = np.abs(values).max()
    cut = zero_tol * radius
    plus = np.sort(values[values > cut])
    minus = np.sort(-values[values < -cut])
    zero_count = len(values) - len(plus) - len(minus)
    if len(plus) + len(minus) == 0:
        raise AllZeroSpectrum("all eigenvalues are numerically zero")
    return SignedSpectrum(
        d_plus=tuple(float(v) for v in plus),
        d_minus=tuple(float(v) for v in minus),
        basis=basis,
        zero_count=zero_count,
    )
