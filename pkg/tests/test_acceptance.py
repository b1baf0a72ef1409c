"""End-to-end campaigns at reduced size"""
import os

import numpy as np
import pytest

from experiments.checks import (
    ASYMPTOTIC_START, MONOTONE_TOL, check_exact_ot_1d, check_gaussian_recursion, check_polynomial,
    check_sphere_derivatives, empirical_ratios,
)
from experiments.config import ExperimentConfig
from experiments.runner import run_experiment
from transport.trace import SinkhornTrace, TraceRow
from utils.errors import ConfigError
from utils.io import csv_body

GAUSSIAN_PAIR = {
    "name": "gaussian-pair",
    "rho": {"model": {"type": "gaussian", "alpha": 1.0}, "grid": {"box": [[-3, 3], [-3, 3]], "resolution": 9}},
    "nu": {"model": {"type": "gaussian", "alpha": 1.0, "center": [0.5, -0.5]},
           "grid": {"box": [[-3, 3], [-3, 3]], "resolution": 9}},
    "cost": {"family": "HalfSquaredEuclidean"},
    "setting": {"name": "log-concave", "sigma_norm": 1.0, "alpha": 1.0},
}


def config_from(**data):
    return ExperimentConfig.from_dict({"name": "acceptance", "seed": 7, **data})


@pytest.fixture(scope="module")
def gaussian_outcome(tmp_path_factory):
    config = config_from(
        epsilons=[1.0],
        trace_iterations=60,
        checks=["monotonicity", "identity", "rate", "hessian", "exact-ot"],
        instances=[GAUSSIAN_PAIR],
        probes={"hessian_points": 5, "gradient_points": 10, "lambda_samples": 50},
    )
    return run_experiment(config, str(tmp_path_factory.mktemp("gaussian")))


class TestGaussianCampaign:
    def test_no_hard_failures(self, gaussian_outcome):
        assert gaussian_outcome.exit_code == 0, [r.as_row() for r in gaussian_outcome.hard_failures]

    def test_every_check_reported(self, gaussian_outcome):
        checks = {r.check for r in gaussian_outcome.results}
        assert {"monotonicity", "identity", "rate", "hessian", "exact-ot"} <= checks

    def test_rate_envelope(self, gaussian_outcome):
        [rate] = [r for r in gaussian_outcome.results if r.check == "rate"]
        assert rate.passed
        assert rate.details["tau"] == pytest.approx(1.0)
        assert rate.details["certificate"].setting == "log-concave"
        assert rate.value <= rate.limit

    def test_summary_row(self, gaussian_outcome):
        [row] = gaussian_outcome.summary
        assert row[0] == "gaussian-pair"
        assert row[1] == 1.0
        assert row[11] > 0

    def test_artifacts(self, gaussian_outcome):
        out = gaussian_outcome.out_dir
        for name in ("checks.csv", "summary.csv", "report.txt"):
            assert os.path.exists(os.path.join(out, name))
        assert os.path.exists(os.path.join(out, "gaussian-pair", "eps_1.0", "trace.csv"))


class TestNonSmoothCost:
    def test_derivative_checks_are_skipped(self, tmp_path):
        instance = dict(GAUSSIAN_PAIR, name="stvs", cost={"family": "STVS", "gamma": 1.0})
        instance.pop("setting")
        config = config_from(epsilons=[1.0], trace_iterations=20, checks=["monotonicity", "identity", "hessian"],
                             instances=[instance])
        outcome = run_experiment(config, str(tmp_path))
        assert outcome.exit_code == 0
        [hessian] = [r for r in outcome.results if r.check == "hessian"]
        assert hessian.status == "warn"
        assert "not twice differentiable" in hessian.message


class TestHeavyTails:
    def test_geometric_decay(self, tmp_path):
        config = config_from(
            epsilons=[1.0],
            trace_iterations=40,
            checks=["monotonicity", "identity", "heavy-tail"],
            instances=[{
                "name": "heavy-1d",
                "rho": {"model": {"type": "heavy-rho", "power": 3.0, "quadratic": 0.1},
                        "grid": {"box": [[-4, 4]], "resolution": 41}},
                "nu": {"model": {"type": "heavy-nu", "power": 1.5}, "grid": {"box": [[-8, 8]], "resolution": 41}},
            }],
        )
        outcome = run_experiment(config, str(tmp_path))
        assert outcome.exit_code == 0
        [decay] = [r for r in outcome.results if r.check == "heavy-tail"]
        assert decay.value < 0


class TestGlobalChecks:
    def test_gaussian_recursion(self):
        result = check_gaussian_recursion(config_from(gaussian={"draws": 6, "steps": 200}))
        assert result.passed, result.message
        rows = result.details["rows"]
        assert len(rows) == 6
        assert {row[1] for row in rows} == {0.1, 1.0, 10.0}
        assert max(row[5] for row in rows) <= 1e-8
        assert max(row[6] for row in rows) <= 1e-12

    def test_sphere_derivatives(self):
        result = check_sphere_derivatives(config_from(sphere={"delta": 0.9, "pairs": 100}))
        assert result.passed, result.message
        assert result.value <= 1e-4

    def test_polynomial(self):
        result = check_polynomial(config_from(polynomial={"draws": 20, "steps": 2000}))
        assert result.passed, result.message
        assert result.value >= -1e-10
        assert ASYMPTOTIC_START < 2000

    def test_monotone_coupling_matches_linear_program(self):
        result = check_exact_ot_1d(config_from(exact_1d={"draws": 100, "max_atoms": 12}))
        assert result.passed, result.message
        assert result.value <= MONOTONE_TOL
        assert result.message.startswith("100 instances")


class TestReproducibility:
    def test_reruns_match_byte_for_byte(self, tmp_path):
        line_pair = {
            "name": "line-pair",
            "rho": {"model": {"type": "gaussian", "alpha": 1.0}, "grid": {"box": [[-3, 3]], "resolution": 15}},
            "nu": {"model": {"type": "gaussian", "alpha": 2.0, "center": [0.5]},
                   "grid": {"box": [[-2.5, 3.5]], "resolution": 15}},
        }
        config = config_from(epsilons=[0.5, 1.0], trace_iterations=20,
                             checks=["monotonicity", "identity", "rate", "hessian", "exact-ot"],
                             instances=[line_pair], probes={"hessian_points": 3, "lambda_samples": 10})
        first = run_experiment(config, str(tmp_path / "first"))
        second = run_experiment(config, str(tmp_path / "second"))
        names = ["checks.csv", "summary.csv"]
        names += [os.path.join("line-pair", f"eps_{eps}", name) for eps in ("0.5", "1.0")
                  for name in ("trace.csv", "checks.csv")]
        for name in names:
            a = os.path.join(first.out_dir, name)
            b = os.path.join(second.out_dir, name)
            assert csv_body(a) == csv_body(b), name
            with open(a) as f:
                assert f.readline().startswith("# generated")


class TestConfigValidation:
    def test_problems_are_collected(self):
        with pytest.raises(ConfigError) as exc:
            config_from(epsilons=[], checks=["rate"], tolerance={"bogus": 1.0})
        diagnostics = exc.value.diagnostics
        assert any("epsilons" in d for d in diagnostics)
        assert any("tolerance" in d for d in diagnostics)
        assert any("per-instance checks need" in d for d in diagnostics)

    def test_round_trip_through_dict(self):
        config = config_from(epsilons=[0.5], checks=["monotonicity"], instances=[GAUSSIAN_PAIR])
        again = ExperimentConfig.from_dict(config.to_dict())
        assert again.to_dict() == config.to_dict()

    def test_ratios_ignore_floor(self):
        values = [1.0, 0.5, 0.25, 0.125, 1e-13, 1e-14]
        trace = SinkhornTrace(1.0, None, [TraceRow(n, v, v, 0.0, 0.0, 0.0) for n, v in enumerate(values)])
        np.testing.assert_allclose(empirical_ratios(trace, 1e-12), [0.5])
