"""FastAPI application exposing the pipeline.

Status codes: 400 for semantic input errors, 422 for schema validation
(FastAPI's own), 409 for numerical failures (no root, series budget,
non-positive-definite covariance), 500 for violated internal invariants.
Error bodies carry {"message", "hint"}.
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import HypervarError, InputError, NumericalError, remediation
from ..pipeline import VarRun, run_covariance, run_gfun, run_var
from .schemas import (
    CovarianceRequest,
    CovarianceResponse,
    GfunRequest,
    GfunResponse,
    SpectrumInputs,
    VarRequest,
    VarResponse,
)


def _http_error(exc: HypervarError) -> HTTPException:
    if isinstance(exc, InputError):
        status = 400
    elif isinstance(exc, NumericalError):
        status = 409
    else:
        status = 500
    return HTTPException(
        status_code=status, detail={"message": str(exc), "hint": remediation(exc)}
    )


def _gamma_matrix(req: SpectrumInputs) -> np.ndarray:
    if (req.gamma1 is None) == (req.gamma1_diag is None):
        raise InputError("provide exactly one of gamma1 or gamma1Diag")
    if req.gamma1 is not None:
        return np.array(req.gamma1, dtype=float)
    return np.diag(np.array(req.gamma1_diag, dtype=float))


def create_app() -> FastAPI:
    app = FastAPI(title="hypervar", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/covariance", response_model=CovarianceResponse)
    def covariance(req: CovarianceRequest) -> CovarianceResponse:
        try:
            out = run_covariance(
                tuple(req.tickers), np.array(req.prices, dtype=float), req.decay
            )
        except HypervarError as exc:
            raise _http_error(exc) from exc
        return CovarianceResponse(
            sigma=[[float(v) for v in row] for row in out["sigma"]],
            dimension=out["dimension"],
            smallestEigenvalue=out["smallestEigenvalue"],
        )

    @app.post("/var", response_model=VarResponse)
    def var(req: VarRequest) -> VarResponse:
        try:
            run = VarRun(
                sigma=np.array(req.sigma, dtype=float),
                gamma1=_gamma_matrix(req),
                theta=req.theta,
                alphas=tuple(req.alphas),
                seed=req.seed,
                samples_per_replicate=req.samples_per_replicate,
                replicates=req.replicates,
                antithetic=req.antithetic,
                tolerance=req.tolerance,
                method=req.method,
            )
            report = run_var(run)
        except HypervarError as exc:
            raise _http_error(exc) from exc
        return VarResponse(**report)

    @app.post("/gfun", response_model=GfunResponse)
    def gfun(req: GfunRequest) -> GfunResponse:
        try:
            report = run_gfun(
                sigma=np.array(req.sigma, dtype=float),
                gamma1=_gamma_matrix(req),
                r_values=tuple(req.r_values),
                method=req.method,
                seed=req.seed,
                samples_per_replicate=req.samples_per_replicate,
                replicates=req.replicates,
                antithetic=req.antithetic,
            )
        except HypervarError as exc:
            raise _http_error(exc) from exc
        return GfunResponse(**report)

    return app
