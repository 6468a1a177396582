import csv
import json

import numpy as np
import pytest

from app.core.config import build_run_config, parse_values
from app.core.exceptions import ConfigError, NonPositiveState
from app.main import run_subcommand
from app.services import radial_ode

FIG1 = ["--N", "3", "--p", "10", "--m", "2", "--q", "4", "--alpha", "1", "--beta", "1"]
PROTOTYPE = ["--N", "3", "--p", "2", "--m", "1", "--q", "2", "--alpha", "0", "--beta", "0"]


def _error_json(err: str) -> dict:
    return json.loads([line for line in err.splitlines() if line.strip()][-1])


def _read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


# ---------------------------------------------------------------------
# CLASSIFY / EXIT CODES
# ---------------------------------------------------------------------
def test_classify_prints_regime(capsys):
    assert run_subcommand(["classify", *PROTOTYPE]) == 0
    assert capsys.readouterr().out.strip() == '{"tag":"BothBlowup","global_exists":false}'


def test_invalid_exponents_exit_with_code_2(capsys):
    code = run_subcommand(["classify", "--N", "3", "--p", "2", "--m", "1", "--q", "1", "--alpha", "0", "--beta", "0"])
    assert code == 2
    error = _error_json(capsys.readouterr().err)
    assert error["error"] == "DeltaZero"
    assert error["exit_code"] == 2


def test_missing_exponents_exit_with_code_2(capsys):
    assert run_subcommand(["classify", "--N", "3"]) == 2
    assert _error_json(capsys.readouterr().err)["error"] == "DomainViolation"


def test_solver_errors_exit_with_code_3(tmp_path, capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise NonPositiveState("u <= 0 at r=0.5")

    monkeypatch.setattr(radial_ode, "integrate", broken)
    assert run_subcommand(["solve", *FIG1, "--out", str(tmp_path)]) == 3
    error = _error_json(capsys.readouterr().err)
    assert error == {"error": "NonPositiveState", "detail": "u <= 0 at r=0.5", "exit_code": 3}


# ---------------------------------------------------------------------
# SOLVE
# ---------------------------------------------------------------------
def test_solve_is_deterministic(tmp_path, capsys):
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        assert run_subcommand(["solve", *FIG1, "--rmax", "50", "--out", str(out)]) == 0

    for name in ("trajectory.csv", "solve.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    report = json.loads((first / "solve.json").read_text())
    assert report["stop"] == "ReachedRMax"
    assert report["regime"] == "AllBoundedGlobal"
    assert list(report) == [
        "params", "initial", "regime", "stop", "r_end", "R_est",
        "n_steps", "n_samples", "monitors", "blowup",
    ]
    artifacts = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert len(artifacts["files"]) == 2


def test_single_point_sweep_matches_classify_and_solve(tmp_path, capsys):
    solve_out, sweep_out = tmp_path / "solve", tmp_path / "sweep"
    assert run_subcommand(["classify", *PROTOTYPE]) == 0
    regime = json.loads(capsys.readouterr().out.strip())
    assert run_subcommand(["solve", *PROTOTYPE, "--rmax", "1e4", "--out", str(solve_out)]) == 0
    assert run_subcommand(["sweep", *PROTOTYPE, "--rmax", "1e4", "--grid", "N=3", "--out", str(sweep_out)]) == 0

    rows = _read_rows(sweep_out / "sweep.csv")
    assert len(rows) == 1
    assert rows[0]["regime"] == regime["tag"]

    report = json.loads((solve_out / "solve.json").read_text())
    assert report["stop"] == "BlowUp"
    assert float(rows[0]["R_est"]) == report["R_est"]


def test_sweep_records_failed_points(tmp_path):
    code = run_subcommand(["sweep", *PROTOTYPE, "--grid", "q=1,2", "--no-solve", "--out", str(tmp_path)])
    assert code == 0
    rows = _read_rows(tmp_path / "sweep.csv")
    assert [row["regime"] for row in rows] == ["DeltaZero", "BothBlowup"]
    assert rows[1]["R_est"] == ""


# ---------------------------------------------------------------------
# CONFIGURATION
# ---------------------------------------------------------------------
def test_config_precedence(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[params]\nN = 3\np = 10\nm = 2\nq = 4\nalpha = 1\nbeta = 1\n"
        "[initial]\na = 3\nb = 4\n"
        "[solver]\nr_max = 30\nrtol = 1e-8\n"
    )
    environ = {"RADIAL_RMAX": "40", "RADIAL_A": "2"}
    cfg = build_run_config({"config": str(path), "rmax": 50.0}, environ=environ)

    assert cfg.integration.r_max == 50.0
    assert cfg.a == 2.0
    assert cfg.b == 4.0
    assert cfg.integration.rtol == 1e-8
    assert cfg.params.delta == 56


def test_config_file_from_environment(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[params]\nN = 3\np = 2\nm = 1\nq = 2\nalpha = 0\nbeta = 0\n")
    cfg = build_run_config({}, environ={"RADIAL_CONFIG": str(path)})
    assert cfg.params.q == 2.0


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[solver]\nstep = 1\n")
    with pytest.raises(ConfigError, match="Unknown key"):
        build_run_config({"config": str(path)}, environ={})


def test_config_rejects_bad_radii():
    cli = {"N": 3, "p": 10, "m": 2, "q": 4, "alpha": 1, "beta": 1, "rmax": 0.5}
    with pytest.raises(ConfigError):
        build_run_config(cli, environ={})


def test_parse_values():
    assert parse_values("2,3,4") == [2.0, 3.0, 4.0]
    assert parse_values("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ConfigError):
        parse_values("a,b")


# ---------------------------------------------------------------------
# FIGURE 1
# ---------------------------------------------------------------------
@pytest.mark.slow
def test_figure1_curves(tmp_path):
    assert run_subcommand(["figure1", "--out", str(tmp_path)]) == 0

    rows = _read_rows(tmp_path / "figure1.csv")
    assert len(rows) == 501
    assert float(rows[0]["r"]) == 0.0 and float(rows[-1]["r"]) == 500.0

    ends = [float(rows[-1][f"u_N{N}"]) for N in (3, 10, 30, 60)]
    assert all(x > y for x, y in zip(ends, ends[1:]))
    for N in (3, 10, 30, 60):
        for name in ("u", "v"):
            values = np.array([float(row[f"{name}_N{N}"]) for row in rows])
            assert np.all(np.diff(values) > 0)

    assert (tmp_path / "figure1.svg").read_text().lstrip().startswith("<?xml")
    summary = json.loads((tmp_path / "figure1.json").read_text())
    assert set(summary["at_r_max"]) == {"N3", "N10", "N30", "N60"}
