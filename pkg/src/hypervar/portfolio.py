"""Quadratic portfolio model building and covariance estimation.

Positions are European options plus share hedges on single underlyings.
Black-Scholes sensitivities are aggregated per underlying and then mapped
to log-return coordinates: delta1_i = S_i * delta_i and
gamma1_ii = S_i^2 * gamma_ii + delta1_i (the extra delta1 term is the
second derivative of S = S_0 exp(x) showing up in the chain rule).
Daily covariance comes from an exponentially weighted moving average of
log-return outer products.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import DimensionMismatch, InputError
from .linalg import validate_symmetric

DAY_COUNT_DEFAULT = 252


@dataclass(frozen=True)
class Instrument:
    """One option position with its share hedge on a single underlying.

    quantity is a signed option count (negative = short); hedge_shares is
    a signed share count held alongside. Rates and volatilities are
    annualized fractions; maturity is in years.
    """

    kind: str
    strike: float
    rate: float
    maturity: float
    spot: float
    vol: float
    quantity: float
    hedge_shares: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("call", "put"):
            raise InputError(f"kind must be 'call' or 'put', got {self.kind!r}")
        for label, value in (
            ("strike", self.strike),
            ("spot", self.spot),
            ("maturity", self.maturity),
            ("vol", self.vol),
        ):
            if not value > 0:
                raise InputError(f"{label} must be > 0, got {value}")


class Greeks(NamedTuple):
    price: float
    delta: float
    gamma: float
    theta_annual: float


def bs_greeks(inst: Instrument) -> Greeks:
    """Black-Scholes price and sensitivities of a European option.

    theta_annual is calendar decay, the derivative of price with respect
    to the passage of time (the negative of the maturity derivative).
    """
    s, k, r, tau, vol = inst.spot, inst.strike, inst.rate, inst.maturity, inst.vol
    sqrt_tau = np.sqrt(tau)
    d1 = (np.log(s / k) + (r + 0.5 * vol * vol) * tau) / (vol * sqrt_tau)
    d2 = d1 - vol * sqrt_tau
    disc = np.exp(-r * tau)
    pdf_d1 = np.exp(-0.5 * d1 * d1) / np.sqrt(2.0 * np.pi)
    gamma = pdf_d1 / (s * vol * sqrt_tau)
    decay = -s * pdf_d1 * vol / (2.0 * sqrt_tau)
    if inst.kind == "call":
        price = s * special.ndtr(d1) - k * disc * special.ndtr(d2)
        delta = special.ndtr(d1)
        theta_annual = decay - r * k * disc * special.ndtr(d2)
    else:
        price = k * disc * special.ndtr(-d2) - s * special.ndtr(-d1)
        delta = special.ndtr(d1) - 1.0
        theta_annual = decay + r * k * disc * special.ndtr(-d2)
    return Greeks(float(price), float(delta), float(gamma), float(theta_annual))


@dataclass(frozen=True)
class QuadraticModel:
    """Second-order portfolio model in daily log-return coordinates.

    theta is currency per day; delta1 and gamma1 are the gradient and
    Hessian with respect to log-returns; sigma is the daily log-return
    covariance. gross_value (sum of absolute position values) scales the
    delta-hedged test.
    """

    theta: float
    delta1: np.ndarray = field(repr=False)
    gamma1: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    gross_value: float = 0.0

    def __post_init__(self):
        n = len(self.delta1)
        if self.gamma1.shape != (n, n) or self.sigma.shape != (n, n):
            raise DimensionMismatch(
                f"model blocks disagree: delta1 has {n} entries, gamma1 is "
                f"{self.gamma1.shape}, sigma is {self.sigma.shape}"
            )

    @property
    def is_delta_hedged(self) -> bool:
        scale = max(self.gross_value, 1e-300)
        return float(np.abs(self.delta1).max()) <= 1e-8 * scale


def build_quadratic_model(
    instruments: list[Instrument],
    sigma: np.ndarray,
    day_count: int = DAY_COUNT_DEFAULT,
) -> QuadraticModel:
    """Aggregate position greeks per underlying and map them to
    log-return coordinates.

    Instruments sharing a name are summed onto one underlying; distinct
    names map to consecutive coordinates in first-appearance order, which
    must match the row order of sigma. Hedge shares add their count to
    the underlying's delta and their value decays nowhere (zero theta and
    gamma).
    """
    if not instruments:
        raise InputError("need at least one instrument")
    if day_count <= 0:
        raise InputError(f"day_count must be positive, got {day_count}")
    sigma = validate_symmetric(sigma)

    keys: list[str] = []
    index: dict[str, int] = {}
    for pos, inst in enumerate(instruments):
        key = inst.name if inst.name else f"#{pos}"
        if key not in index:
            index[key] = len(keys)
            keys.append(key)
    n = len(keys)
    if sigma.shape[0] != n:
        raise DimensionMismatch(
            f"covariance is {sigma.shape[0]}x{sigma.shape[0]} but instruments "
            f"define {n} underlyings"
        )

    spot = np.zeros(n)
    delta = np.zeros(n)
    gamma_diag = np.zeros(n)
    theta_annual = 0.0
    gross = 0.0
    for pos, inst in enumerate(instruments):
        i = index[inst.name if inst.name else f"#{pos}"]
        if spot[i] == 0.0:
            spot[i] = inst.spot
        elif spot[i] != inst.spot:
            raise InputError(
                f"instrument {pos} quotes spot {inst.spot} but underlying "
                f"{keys[i]!r} was already set to {spot[i]}"
            )
        g = bs_greeks(inst)
        delta[i] += inst.quantity * g.delta + inst.hedge_shares
        gamma_diag[i] += inst.quantity * g.gamma
        theta_annual += inst.quantity * g.theta_annual
        gross += abs(inst.quantity) * g.price + abs(inst.hedge_shares) * inst.spot

    delta1 = spot * delta
    gamma1 = np.diag(spot * spot * gamma_diag + delta1)
    return QuadraticModel(
        theta=theta_annual / day_count,
        delta1=delta1,
        gamma1=gamma1,
        sigma=sigma,
        gross_value=gross,
    )


@dataclass(frozen=True)
class ReturnSeries:
    """Daily log-returns, one column per ticker, oldest row first."""

    tickers: tuple[str, ...]
    observations: np.ndarray = field(repr=False)

    def __post_init__(self):
        obs = self.observations
        if obs.ndim != 2 or obs.shape[1] != len(self.tickers):
            raise DimensionMismatch(
                f"observations shape {obs.shape} does not match "
                f"{len(self.tickers)} tickers"
            )
        if obs.shape[0] < 2:
            raise InputError("need at least 2 return observations")


def returns_from_prices(tickers: tuple[str, ...], prices: np.ndarray) -> ReturnSeries:
    """Log-returns of consecutive close prices (oldest first)."""
    prices = np.asarray(prices, dtype=float)
    if prices.ndim != 2:
        raise InputError(f"prices must be a 2-d table, got shape {prices.shape}")
    if np.any(prices <= 0):
        raise InputError("prices must be strictly positive")
    if prices.shape[0] < 3:
        raise InputError("need at least 3 price rows to form 2 returns")
    obs = np.diff(np.log(prices), axis=0)
    return ReturnSeries(tickers=tuple(tickers), observations=obs)


def ewma_covariance(series: ReturnSeries, lam: float) -> np.ndarray:
    """Exponentially weighted covariance of daily log-returns.

    Seeds with the first observation's outer product and then applies
    sigma_t = lam * sigma_{t-1} + (1 - lam) * x_t' x_t through the series.
    """
    if not 0.0 < lam < 1.0:
        raise InputError(f"lambda must be in (0, 1), got {lam}")
    obs = series.observations
    sigma = np.outer(obs[0], obs[0])
    for t in range(1, obs.shape[0]):
        sigma = lam * sigma + (1.0 - lam) * np.outer(obs[t], obs[t])
    return 0.5 * (sigma + sigma.T)


def vol_from_sigma(sigma: np.ndarray, i: int, day_count: int = DAY_COUNT_DEFAULT) -> float:
    """Annualized volatility implied by the i-th daily variance."""
    sigma = np.asarray(sigma, dtype=float)
    var = float(sigma[i, i])
    if var <= 0:
        raise InputError(f"daily variance for underlying {i} must be > 0, got {var}")
    return float(np.sqrt(day_count * var))
