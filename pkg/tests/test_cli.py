import json
import os
from datetime import datetime

import numpy as np
import pytest

from app import EXIT_OK, EXIT_USAGE, __version__, main
from utils.io import csv_body, read_csv
from utils.logger import log_path, setup_logger

GLOBAL_CONFIG = {
    "name": "globals",
    "seed": 11,
    "checks": ["gaussian-recursion", "polynomial", "sphere-derivatives"],
    "gaussian": {"draws": 3, "steps": 50},
    "polynomial": {"draws": 3, "steps": 300},
    "sphere": {"delta": 0.9, "pairs": 10},
}

ONE_BY_ONE = {
    "name": "one-by-one",
    "epsilons": [1.0],
    "trace_iterations": 5,
    "checks": ["monotonicity", "identity", "hessian", "conditional-kl", "exact-ot"],
    "probes": {"hessian_points": 3, "gradient_points": 3, "lambda_samples": 10, "kl_pairs": 5},
    "instances": [
        {"name": "dirac-pair", "rho": {"points": [[0.0, 0.0]]}, "nu": {"points": [[1.0, 0.5]]}}
    ],
}

LINE_CONFIG = {
    "name": "line",
    "seed": 5,
    "epsilons": [0.5, 1.0],
    "trace_iterations": 30,
    "checks": ["monotonicity", "identity", "rate", "exact-ot"],
    "probes": {"lambda_samples": 20},
    "instances": [
        {
            "name": "gauss-1d",
            "rho": {"model": {"type": "gaussian", "alpha": 1.0}, "grid": {"box": [[-3, 3]], "resolution": 15}},
            "nu": {"model": {"type": "gaussian", "alpha": 2.0, "center": [0.5]},
                   "grid": {"box": [[-2.5, 3.5]], "resolution": 15}},
        },
        {
            "name": "pcost-1d",
            "rho": {"model": {"type": "uniform"}, "grid": {"box": [[-1, 1]], "resolution": 11}},
            "nu": {"model": {"type": "gaussian", "alpha": 1.0}, "grid": {"box": [[-2, 2]], "resolution": 13}},
            "cost": {"family": "PCost", "p": 1.5},
        },
    ],
}


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write_config(directory, data, name="config.json"):
    path = directory / name
    path.write_text(json.dumps(data))
    return str(path)


class TestLogger:
    def test_log_file_is_named_by_day(self, tmp_path):
        path = log_path(str(tmp_path), datetime(2024, 3, 9))
        assert path == os.path.join(str(tmp_path), "sinkhorn-lab_20240309.log")

    def test_console_only_creates_no_log_directory(self, tmp_path):
        log_dir = tmp_path / "logs"
        assert setup_logger(log_dir=str(log_dir), to_file=False).name == "sinkhorn_lab"
        assert not log_dir.exists()


class TestInformationalCommands:
    def test_version(self, capsys):
        assert main(["version"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == f"sinkhorn-lab {__version__}"

    def test_predict_compact(self, capsys):
        assert main(["predict", "--setting", "compact", "--tau", "1", "--eps", "1", "--R", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "contraction = 0.5 " in out
        lines = out.strip().splitlines()
        assert lines[1].startswith("setting,params,tau,epsilon,lambda,contraction")
        assert lines[2].startswith("compact,R=1.0,1.0,1.0,1.0,0.5,")

    def test_predict_sphere_regular(self, capsys):
        assert main(["predict", "--setting", "sphere-regular", "--tau", "1", "--eps", "1"]) == EXIT_OK
        assert "contraction = 0.75 " in capsys.readouterr().out

    def test_predict_missing_tau(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["predict", "--setting", "compact", "--eps", "1", "--R", "1"])
        assert exc.value.code == EXIT_USAGE
        assert "--tau" in capsys.readouterr().err

    def test_predict_missing_setting_parameter(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["predict", "--setting", "anisotropic", "--tau", "1", "--eps", "1", "--alpha", "1"])
        assert exc.value.code == EXIT_USAGE
        assert "missing parameter" in capsys.readouterr().err

    def test_catalog_stdout(self, capsys):
        assert main(["catalog"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("setting,")
        assert len(lines) == 1 + 12 * 3 * 6

    def test_catalog_file(self, workdir):
        assert main(["catalog", "--out", "catalog.csv"]) == EXIT_OK
        header, rows = read_csv(workdir / "catalog.csv")
        assert header[0] == "setting"
        assert len(rows) == 216


class TestRunCommand:
    def test_invalid_config(self, workdir, capsys):
        path = write_config(workdir, {"checks": ["bogus"], "epsilons": [-1.0]})
        assert main(["run", "--config", path]) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "Invalid config" in err
        assert "unknown check id 'bogus'" in err
        assert "every value must be positive" in err

    def test_missing_config(self, workdir):
        assert main(["run", "--config", "nowhere.json"]) == EXIT_USAGE

    def test_global_checks(self, workdir):
        path = write_config(workdir, GLOBAL_CONFIG)
        assert main(["run", "--config", path, "--out", "out"]) == EXIT_OK
        header, rows = read_csv(workdir / "out" / "gaussian_recursion.csv")
        assert header[0] == "draw"
        assert len(rows) == 3
        report = (workdir / "out" / "report.txt").read_text()
        assert report.strip().endswith("PASSED")
        assert "polynomial" in report

    def test_single_atom_instance(self, workdir):
        path = write_config(workdir, ONE_BY_ONE)
        assert main(["run", "--config", path, "--out", "out"]) == EXIT_OK
        header, rows = read_csv(workdir / "out" / "dirac-pair" / "eps_1.0" / "trace.csv")
        assert len(rows) == 5
        data = np.array(rows, dtype=float)
        for name in ("kl_plan_nn", "kl_plan_n1n", "kl_rho_wrong", "kl_nu_wrong"):
            np.testing.assert_array_equal(data[:, header.index(name)], 0.0)
        assert os.path.exists(workdir / "logs")

    def test_seed_override_and_jobs(self, workdir):
        path = write_config(workdir, LINE_CONFIG)
        assert main(["run", "--config", path, "--out", "serial"]) == EXIT_OK
        assert main(["run", "--config", path, "--out", "parallel", "--jobs", "2"]) == EXIT_OK
        assert csv_body(workdir / "serial" / "checks.csv") == csv_body(workdir / "parallel" / "checks.csv")
        assert csv_body(workdir / "serial" / "summary.csv") == csv_body(workdir / "parallel" / "summary.csv")
        for instance in ("gauss-1d", "pcost-1d"):
            for eps in ("0.5", "1.0"):
                assert os.path.exists(workdir / "serial" / instance / f"eps_{eps}" / "checks.csv")

    def test_plots(self, workdir):
        config = dict(LINE_CONFIG, epsilons=[1.0], checks=["monotonicity"])
        path = write_config(workdir, config)
        assert main(["run", "--config", path, "--out", "out", "--plots"]) == EXIT_OK
        svg = workdir / "out" / "gauss-1d" / "eps_1.0" / "kl_trace.svg"
        assert svg.exists()
        assert "<svg" in svg.read_text()
