"""Command-line front end.

Every data command computes in-process by default; pass --server URL to
delegate the same request to a running HTTP service instead. Exit codes:
0 success, 2 input error, 3 numerical failure, 4 internal invariant
violation.
"""
from __future__ import annotations

import sys
from typing import Optional

import click
import httpx
import numpy as np

from . import __version__
from .dataio import (
    read_instruments_csv,
    read_matrix_csv,
    read_prices_csv,
    read_vector_csv,
    report_to_json,
    write_gfun_csv,
    write_matrix_csv,
)
from .errors import (
    HypervarError,
    InputError,
    InvariantViolation,
    NumericalError,
    remediation,
)
from .pipeline import METHODS, VarRun, run_covariance, run_gfun, run_var
from .portfolio import build_quadratic_model, ewma_covariance, returns_from_prices


def _fail(code: int, exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, HypervarError):
        hint = remediation(exc)
        if hint:
            click.echo(f"hint: {hint}", err=True)
    sys.exit(code)


def _guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InputError as exc:
        _fail(2, exc)
    except NumericalError as exc:
        _fail(3, exc)
    except InvariantViolation as exc:
        _fail(4, exc)


def _parse_floats(text: str, label: str) -> tuple[float, ...]:
    values = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            values.append(float(piece))
        except ValueError:
            raise InputError(f"{label}: not a number: {piece!r}") from None
    if not values:
        raise InputError(f"{label}: no values given")
    return tuple(values)


def _post(server: str, path: str, payload: dict) -> dict:
    url = server.rstrip("/") + path
    try:
        resp = httpx.post(url, json=payload, timeout=600.0)
    except httpx.HTTPError as exc:
        _fail(2, InputError(f"service request to {url} failed: {exc}"))
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail", {})
    except ValueError:
        detail = {}
    message = detail.get("message", resp.text) if isinstance(detail, dict) else str(detail)
    hint = detail.get("hint", "") if isinstance(detail, dict) else ""
    click.echo(f"error: {message}", err=True)
    if hint:
        click.echo(f"hint: {hint}", err=True)
    if resp.status_code in (400, 422):
        sys.exit(2)
    if resp.status_code == 409:
        sys.exit(3)
    sys.exit(4)


def _gamma_from_files(
    gamma1_diag: Optional[str], gamma1: Optional[str]
) -> np.ndarray:
    if (gamma1_diag is None) == (gamma1 is None):
        raise InputError("provide exactly one of --gamma1-diag or --gamma1")
    if gamma1_diag is not None:
        return np.diag(read_vector_csv(gamma1_diag))
    return read_matrix_csv(gamma1)


def _print_var_table(report: dict) -> None:
    click.echo(
        f"{'alpha':>8} {'R':>10} {'V':>14} {'gAtR':>10} {'stdErr':>10} "
        f"{'method':>9} {'n+':>3} {'n-':>3}"
    )
    for e in report["results"]:
        click.echo(
            f"{e['alpha']:>8.4f} {e['R']:>10.6f} {e['V']:>14.6f} "
            f"{e['gAtR']:>10.6f} {e['standardError']:>10.2e} "
            f"{e['method']:>9} {e['nPlus']:>3d} {e['nMinus']:>3d}"
        )


@click.group()
@click.version_option(version=__version__, prog_name="hypervar")
def main() -> None:
    """Quadratic Value-at-Risk over hyperboloid tail regions."""


@main.command()
@click.option("--prices", "prices_path", required=True, help="Close-price CSV (header of tickers, oldest row first).")
@click.option("--lambda", "decay", default=0.94, show_default=True, help="EWMA decay factor in (0, 1).")
@click.option("--out", "out_path", required=True, help="Where to write the covariance CSV.")
@click.option("--server", default=None, help="Base URL of a running service; compute there instead of in-process.")
def covariance(prices_path: str, decay: float, out_path: str, server: Optional[str]) -> None:
    """Estimate the EWMA covariance of daily log-returns."""

    def body() -> None:
        tickers, prices = read_prices_csv(prices_path)
        if server:
            out = _post(
                server,
                "/covariance",
                {
                    "tickers": list(tickers),
                    "prices": [list(map(float, row)) for row in prices],
                    "lambda": decay,
                },
            )
            sigma = np.array(out["sigma"], dtype=float)
            dimension, smallest = out["dimension"], out["smallestEigenvalue"]
        else:
            out = run_covariance(tickers, prices, decay)
            sigma = out["sigma"]
            dimension, smallest = out["dimension"], out["smallestEigenvalue"]
        write_matrix_csv(out_path, sigma)
        click.echo(f"dimension: {dimension}")
        click.echo(f"smallest eigenvalue: {smallest:.6e}")
        click.echo(f"wrote covariance to {out_path}")

    _guarded(body)


@main.command()
@click.option("--sigma", "sigma_path", default=None, help="Covariance CSV (direct mode).")
@click.option("--gamma1-diag", "gamma1_diag_path", default=None, help="Curvature diagonal CSV (direct mode).")
@click.option("--gamma1", "gamma1_path", default=None, help="Full curvature matrix CSV (direct mode).")
@click.option("--theta", type=float, default=None, help="Daily theta (direct mode).")
@click.option("--instruments", "instruments_path", default=None, help="Instruments CSV (market mode).")
@click.option("--prices", "prices_path", default=None, help="Close-price CSV (market mode).")
@click.option("--lambda", "decay", default=0.94, show_default=True, help="EWMA decay factor (market mode).")
@click.option("--day-count", default=252, show_default=True, help="Trading days per year.")
@click.option("--alpha", "alpha_text", required=True, help="Comma-separated tail probabilities, e.g. 0.05,0.01.")
@click.option("--seed", default=0, show_default=True, help="Seed for the sampling methods.")
@click.option("--samples", default=100000, show_default=True, help="Samples per replicate.")
@click.option("--replicates", default=32, show_default=True, help="Replicates (standard error comes from their spread).")
@click.option("--antithetic/--no-antithetic", default=True, show_default=True)
@click.option("--tol", default=1e-4, show_default=True, help="Residual tolerance on |G(R) - alpha|.")
@click.option("--method", type=click.Choice(METHODS), default="auto", show_default=True)
@click.option("--out", "out_path", default=None, help="Where to write the JSON report.")
@click.option("--server", default=None, help="Base URL of a running service.")
def var(
    sigma_path: Optional[str],
    gamma1_diag_path: Optional[str],
    gamma1_path: Optional[str],
    theta: Optional[float],
    instruments_path: Optional[str],
    prices_path: Optional[str],
    decay: float,
    day_count: int,
    alpha_text: str,
    seed: int,
    samples: int,
    replicates: int,
    antithetic: bool,
    tol: float,
    method: str,
    out_path: Optional[str],
    server: Optional[str],
) -> None:
    """Solve G(R) = alpha and report R and V = R^2/2 - theta."""

    def body() -> None:
        alphas = _parse_floats(alpha_text, "--alpha")
        direct = sigma_path is not None
        market = instruments_path is not None
        if direct == market:
            raise InputError(
                "provide either --sigma with --gamma1-diag/--gamma1 and --theta "
                "(direct mode), or --instruments with --prices (market mode)"
            )
        if direct:
            sigma = read_matrix_csv(sigma_path)
            gamma1 = _gamma_from_files(gamma1_diag_path, gamma1_path)
            if theta is None:
                raise InputError("direct mode needs --theta")
            theta_val = theta
        else:
            if prices_path is None:
                raise InputError("market mode needs --prices")
            if theta is not None:
                raise InputError(
                    "--theta conflicts with --instruments; theta is computed "
                    "from the positions"
                )
            tickers, prices = read_prices_csv(prices_path)
            series = returns_from_prices(tickers, prices)
            sigma = ewma_covariance(series, decay)
            instruments = read_instruments_csv(instruments_path, sigma, day_count)
            model = build_quadratic_model(instruments, sigma, day_count)
            gamma1 = model.gamma1
            theta_val = model.theta
            if not model.is_delta_hedged:
                raise InputError(
                    f"portfolio is not delta-hedged "
                    f"(max |delta1| = {np.abs(model.delta1).max():.3e}); the "
                    f"tail model drops the linear term, so the result would "
                    f"misstate risk. Set hedge_shares on each position so "
                    f"quantity * delta + hedge_shares sums to zero per "
                    f"underlying."
                )
        if server:
            payload = {
                "sigma": [list(map(float, row)) for row in sigma],
                "gamma1": [list(map(float, row)) for row in gamma1],
                "theta": float(theta_val),
                "alphas": list(alphas),
                "seed": seed,
                "samplesPerReplicate": samples,
                "replicates": replicates,
                "antithetic": antithetic,
                "tolerance": tol,
                "method": method,
            }
            report = _post(server, "/var", payload)
        else:
            run = VarRun(
                sigma=sigma,
                gamma1=gamma1,
                theta=float(theta_val),
                alphas=alphas,
                seed=seed,
                samples_per_replicate=samples,
                replicates=replicates,
                antithetic=antithetic,
                tolerance=tol,
                method=method,
            )
            report = run_var(run)
        _print_var_table(report)
        if out_path:
            with open(out_path, "w") as fh:
                fh.write(report_to_json(report))
            click.echo(f"wrote report to {out_path}")

    _guarded(body)


@main.command()
@click.option("--sigma", "sigma_path", required=True, help="Covariance CSV.")
@click.option("--gamma1-diag", "gamma1_diag_path", default=None, help="Curvature diagonal CSV.")
@click.option("--gamma1", "gamma1_path", default=None, help="Full curvature matrix CSV.")
@click.option("--R", "r_text", required=True, help="Comma-separated radii, e.g. 0.5,0.9,1.2.")
@click.option("--method", type=click.Choice(METHODS), default="auto", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--samples", default=100000, show_default=True, help="Samples per replicate.")
@click.option("--replicates", default=32, show_default=True)
@click.option("--antithetic/--no-antithetic", default=True, show_default=True)
@click.option("--out", "out_path", default=None, help="Where to write an R,G,standardError CSV.")
@click.option("--server", default=None, help="Base URL of a running service.")
def gfun(
    sigma_path: str,
    gamma1_diag_path: Optional[str],
    gamma1_path: Optional[str],
    r_text: str,
    method: str,
    seed: int,
    samples: int,
    replicates: int,
    antithetic: bool,
    out_path: Optional[str],
    server: Optional[str],
) -> None:
    """Evaluate the tail function G at chosen radii."""

    def body() -> None:
        r_values = _parse_floats(r_text, "--R")
        sigma = read_matrix_csv(sigma_path)
        gamma1 = _gamma_from_files(gamma1_diag_path, gamma1_path)
        if server:
            payload = {
                "sigma": [list(map(float, row)) for row in sigma],
                "gamma1": [list(map(float, row)) for row in gamma1],
                "R": list(r_values),
                "method": method,
                "seed": seed,
                "samplesPerReplicate": samples,
                "replicates": replicates,
                "antithetic": antithetic,
            }
            report = _post(server, "/gfun", payload)
        else:
            report = run_gfun(
                sigma=sigma,
                gamma1=gamma1,
                r_values=r_values,
                method=method,
                seed=seed,
                samples_per_replicate=samples,
                replicates=replicates,
                antithetic=antithetic,
            )
        click.echo(f"{'R':>10} {'G':>12} {'stdErr':>10}")
        for p in report["points"]:
            click.echo(
                f"{p['R']:>10.6f} {p['G']:>12.8f} {p['standardError']:>10.2e}"
            )
        if out_path:
            write_gfun_csv(out_path, report["points"])
            click.echo(f"wrote table to {out_path}")

    _guarded(body)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    try:
        import uvicorn
    except ImportError:
        _fail(2, InputError("uvicorn is not installed; install the [server] extra"))
    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
