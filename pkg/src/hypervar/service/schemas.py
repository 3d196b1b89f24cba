"""Request and response bodies of the HTTP service.

Field aliases follow the JSON report vocabulary (camelCase), so a CLI
report and a service response serialize identically.
"""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class _CamelModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)


class SpectrumInputs(_CamelModel):
    """Direct quadratic-model inputs shared by /var and /gfun."""

    sigma: list[list[float]]
    gamma1_diag: Optional[list[float]] = Field(None, alias="gamma1Diag")
    gamma1: Optional[list[list[float]]] = None


class VarRequest(SpectrumInputs):
    theta: float = 0.0
    alphas: list[float]
    seed: int = 0
    samples_per_replicate: int = Field(100000, alias="samplesPerReplicate")
    replicates: int = 32
    antithetic: bool = True
    tolerance: float = 1e-4
    method: str = "auto"


class VarEntry(_CamelModel):
    alpha: float
    R: float
    V: float
    gAtR: float
    standardError: float
    method: str
    nPlus: int
    nMinus: int


class VarResponse(_CamelModel):
    results: list[VarEntry]
    config: dict


class GfunRequest(SpectrumInputs):
    r_values: list[float] = Field(alias="R")
    method: str = "auto"
    seed: int = 0
    samples_per_replicate: int = Field(100000, alias="samplesPerReplicate")
    replicates: int = 32
    antithetic: bool = True


class GfunPoint(_CamelModel):
    R: float
    G: float
    standardError: float


class GfunResponse(_CamelModel):
    points: list[GfunPoint]
    config: dict


class CovarianceRequest(_CamelModel):
    tickers: list[str]
    prices: list[list[float]]
    decay: float = Field(0.94, alias="lambda", gt=0.0, lt=1.0)


class CovarianceResponse(_CamelModel):
    sigma: list[list[float]]
    dimension: int
    smallestEigenvalue: float
