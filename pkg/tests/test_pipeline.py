"""Routing, solving, and report assembly shared by CLI and service."""
from __future__ import annotations

import math

import numpy as np
import pytest

from hypervar import (
    InputError,
    VarRun,
    ewma_covariance,
    returns_from_prices,
    run_covariance,
    run_gfun,
    run_var,
    spectrum_from_inputs,
)
from hypervar.dataio import report_to_json
from hypervar.pipeline import (
    _effective_tolerance,
    classify_signature,
    make_evaluator,
    resolve_method,
)
from hypervar.hyperboloid import McConfig

from .conftest import make_spectrum

RESULT_KEYS = ["alpha", "R", "V", "gAtR", "standardError", "method", "nPlus", "nMinus"]


class TestRouting:
    def test_classify(self):
        assert classify_signature(make_spectrum(d_minus=(1.0,))) == "neg-only"
        assert classify_signature(make_spectrum(d_plus=(1.0,))) == "pos-only"
        assert classify_signature(make_spectrum(d_plus=(1.0,), d_minus=(2.0,))) == "mixed"

    def test_auto_resolution(self):
        spec = make_spectrum(d_plus=(1.0,), d_minus=(2.0,))
        assert resolve_method("auto", spec) == "mixed"
        assert resolve_method("general", spec) == "general"
        assert resolve_method("oracle", spec) == "oracle"

    def test_incompatible_forced_routes(self):
        mixed = make_spectrum(d_plus=(1.0,), d_minus=(2.0,))
        neg = make_spectrum(d_minus=(2.0,))
        pos = make_spectrum(d_plus=(1.0,))
        with pytest.raises(InputError):
            resolve_method("neg-only", mixed)
        with pytest.raises(InputError):
            resolve_method("pos-only", mixed)
        with pytest.raises(InputError):
            resolve_method("mixed", neg)
        with pytest.raises(InputError):
            resolve_method("general", pos)
        assert resolve_method("oracle", neg) == "oracle"

    def test_spectrum_from_inputs_matches_manual_split(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((4, 4))
        sigma = a @ a.T + 0.1 * np.eye(4)
        gamma1 = np.diag([2.0, -1.0, 0.5, -0.25])
        spec = spectrum_from_inputs(sigma, gamma1)
        c = np.linalg.cholesky(sigma)
        ref = np.linalg.eigvalsh(c.T @ gamma1 @ c)
        got = np.sort(np.concatenate([spec.d_plus, [-w for w in spec.d_minus]]))
        assert np.abs(np.sort(ref) - got).max() <= 1e-10 * np.abs(ref).max()

    def test_effective_tolerance(self):
        spec = make_spectrum(d_minus=(1.0, 0.5))
        det = make_evaluator("neg-only", spec, McConfig(seed=0))
        assert _effective_tolerance("neg-only", det, 1e-6) == 1e-6
        mixed_spec = make_spectrum(d_plus=(0.5,), d_minus=(1.0,))
        cfg = McConfig(seed=0, replicates=4, samples_per_replicate=500)
        noisy = make_evaluator("mixed", mixed_spec, cfg)
        assert _effective_tolerance("mixed", noisy, 1e-12) >= 1e-12


class TestRunVar:
    def test_neg_only_closed_form(self):
        sigma = np.eye(2)
        gamma1 = -2.0 * np.eye(2)  # G(R) = exp(-R^2 / 4)
        report = run_var(VarRun(sigma=sigma, gamma1=gamma1, theta=-1.0,
                                alphas=(0.05,), tolerance=1e-9))
        (row,) = report["results"]
        assert list(row.keys()) == RESULT_KEYS
        assert row["method"] == "neg-only"
        assert row["R"] == pytest.approx(math.sqrt(-4.0 * math.log(0.05)), abs=1e-6)
        assert row["V"] == row["R"] ** 2 / 2.0 + 1.0
        assert abs(row["gAtR"] - 0.05) <= 1e-9
        assert row["nPlus"] == 0 and row["nMinus"] == 2

    def test_pos_only_flipped_identity(self):
        sigma = np.eye(2)
        gamma1 = 2.0 * np.eye(2)  # P(Q <= R^2) = 1 - exp(-R^2 / 4)
        report = run_var(VarRun(sigma=sigma, gamma1=gamma1, theta=-1.0,
                                alphas=(0.3,), tolerance=1e-9))
        (row,) = report["results"]
        assert row["method"] == "pos-only"
        expected_r = math.sqrt(-4.0 * math.log(0.7))
        assert row["R"] == pytest.approx(expected_r, abs=1e-6)
        assert row["V"] == -row["R"] ** 2 / 2.0 + 1.0
        assert abs(row["gAtR"] - 0.3) <= 1e-9

    def test_alphas_reported_descending(self):
        report = run_var(VarRun(sigma=np.eye(1), gamma1=-np.eye(1),
                                alphas=(0.01, 0.05, 0.025)))
        alphas = [row["alpha"] for row in report["results"]]
        assert alphas == [0.05, 0.025, 0.01]
        assert report["config"]["alphas"] == [0.05, 0.025, 0.01]
        radii = [row["R"] for row in report["results"]]
        assert radii == sorted(radii)

    def test_auto_equals_forced_route(self):
        sigma = np.eye(2)
        gamma1 = np.diag([-1.0, -0.5])
        auto = run_var(VarRun(sigma=sigma, gamma1=gamma1, alphas=(0.05, 0.01)))
        forced = run_var(VarRun(sigma=sigma, gamma1=gamma1, alphas=(0.05, 0.01),
                                method="neg-only"))
        assert auto["results"] == forced["results"]
        assert forced["config"]["method"] == "neg-only"

    def test_mixed_route_reports_are_byte_identical(self):
        run = VarRun(sigma=np.eye(2), gamma1=np.diag([1.0, -1.0]),
                     alphas=(0.3, 0.2), seed=5,
                     samples_per_replicate=4_000, replicates=4)
        a = report_to_json(run_var(run))
        b = report_to_json(run_var(run))
        assert a == b

    def test_identity_holds_on_every_row(self):
        run = VarRun(sigma=np.eye(2), gamma1=np.diag([0.8, -1.2]), theta=-0.4,
                     alphas=(0.2, 0.1), seed=1,
                     samples_per_replicate=4_000, replicates=4)
        for row in run_var(run)["results"]:
            assert row["V"] == row["R"] ** 2 / 2.0 + 0.4

    def test_validation(self):
        with pytest.raises(InputError):
            VarRun(sigma=np.eye(1), gamma1=np.eye(1), alphas=())
        with pytest.raises(InputError):
            VarRun(sigma=np.eye(1), gamma1=np.eye(1), alphas=(1.5,))
        with pytest.raises(InputError):
            VarRun(sigma=np.eye(1), gamma1=np.eye(1), method="newton")
        with pytest.raises(InputError):
            VarRun(sigma=np.eye(1), gamma1=np.eye(1), tolerance=0.0)


class TestRunGfun:
    def test_deterministic_route_matches_closed_form(self):
        grid = tuple(np.linspace(0.0, 3.0, 7))
        report = run_gfun(np.eye(2), -2.0 * np.eye(2), grid)
        assert report["config"]["route"] == "neg-only"
        for p in report["points"]:
            assert p["G"] == pytest.approx(math.exp(-p["R"] ** 2 / 4.0), abs=1e-9)

    def test_fixed_seed_grid_is_monotone(self):
        grid = tuple(np.linspace(0.0, 2.0, 12))
        report = run_gfun(np.eye(2), np.diag([1.0, -1.0]), grid, seed=3,
                          samples_per_replicate=4_000, replicates=4)
        values = [p["G"] for p in report["points"]]
        assert all(b <= a for a, b in zip(values, values[1:]))
        assert report["config"]["nPlus"] == 1 and report["config"]["nMinus"] == 1

    def test_validation(self):
        with pytest.raises(InputError):
            run_gfun(np.eye(1), -np.eye(1), ())
        with pytest.raises(InputError):
            run_gfun(np.eye(1), -np.eye(1), (-1.0,))
        with pytest.raises(InputError):
            run_gfun(np.eye(1), -np.eye(1), (1.0,), method="fancy")


class TestRunCovariance:
    def test_matches_library_estimator(self):
        rng = np.random.default_rng(12)
        prices = 100.0 * np.exp(np.cumsum(rng.standard_normal((60, 3)) * 0.01, axis=0))
        tickers = ("A", "B", "C")
        out = run_covariance(tickers, prices, 0.94)
        expected = ewma_covariance(returns_from_prices(tickers, prices), 0.94)
        assert np.array_equal(out["sigma"], expected)
        assert out["dimension"] == 3
        assert out["smallestEigenvalue"] == pytest.approx(
            np.linalg.eigvalsh(expected).min(), rel=1e-8, abs=1e-18
        )
