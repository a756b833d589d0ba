'''
Tests for the command line and the run reports it emits.
'''
import json
from pathlib import Path

import pytest

from gcapacity.analysis.special_fn import phi, two_barrier_series
from gcapacity.errors import SeriesConvergenceError
from gcapacity.system import cli
from gcapacity.system.cli import EXIT_INVALID_INPUT, EXIT_NUMERICAL, main
from gcapacity.system.report import EXIT_CHECK_FAILED, EXIT_OK, Check, RunReport

SETS_FILE = Path(__file__).resolve().parents[1] / "data" / "example_sets.json"


def _json_run(capsys, argv):
    code = main(argv + ["--output", "json"])
    output = capsys.readouterr().out
    return code, (json.loads(output) if code in (EXIT_OK, EXIT_CHECK_FAILED) else None)


@pytest.mark.parametrize("name, expected", [
    ("origin", 1.0),
    ("open_unit_interval", 1.0),
    ("right_block", phi(0.5)),
    ("point_one", phi(1.0)),
    ("two_points", two_barrier_series(-1.0, 1.0, 1.0, 1.0)),
    ("outer_rays", two_barrier_series(-1.0, 1.0, 1.0, 1.0)),
    ("asymmetric_rays", two_barrier_series(-1.0, 2.0, 1.0, 1.0)),
    ("mixed", two_barrier_series(-2.5, 0.75, 1.0, 1.0)),
    ("empty", 0.0),
])
def test_capacity_of_named_sets(capsys, name, expected):
    code, document = _json_run(capsys, ["capacity", "--set-name", name, "--sets-file", str(SETS_FILE)])
    assert code == EXIT_OK
    assert document["outputs"]["capacity"] == expected
    assert document["schema"] == 1


def test_capacity_inline_set_and_file_output(capsys, tmp_path):
    out = tmp_path / "report.json"
    code = main(["capacity", "--set", '{"intervals": [[0.5, "inf", "closed", "open"]]}',
                 "--sigma-bar", "2", "--T", "0.25", "--output", "json", "--out", str(out)])
    assert code == EXIT_OK
    document = json.loads(out.read_text())
    assert document["outputs"]["capacity"] == phi(0.5)
    assert document["outputs"]["classification"]["case_tag"] == "ONE_SIDED"
    assert document["outputs"]["classification"]["rho_minus"] == "inf"
    assert capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["capacity", "--set", "{not json"],
    ["capacity", "--set", '{"points": [1.0]}', "--sigma-under", "0.5"],
    ["capacity", "--set", '{"intervals": [[2, 1]]}'],
    ["capacity"],
    ["capacity", "--set-name", "nowhere", "--sets-file", str(SETS_FILE)],
    ["capacity", "--set-file", "/nonexistent/set.json"],
    ["pde-solve", "--payoff", "cubic"],
    ["pde-solve", "--payoff", "constant:1", "--dx", "0.1", "--dt", "0.5"],
    ["mc", "--strategy", "constant:0.5"],
    ["mc", "--strategy", "bang-bang:1,2", "--paths", "100"],
    ["hitting-density", "--x", "3"],
])
def test_invalid_input_exit_code(argv, capsys):
    assert main(argv) == EXIT_INVALID_INPUT
    assert capsys.readouterr().out == ""


def test_numerical_failure_exit_code(monkeypatch, capsys):
    def diverging(spec, p):
        raise SeriesConvergenceError("no convergence", partial_sum=0.5, remainder_bound=1.0, n_terms=1)

    monkeypatch.setattr(cli, "capacity_report", diverging)
    assert main(["capacity", "--set", '{"points": [-1, 1]}']) == EXIT_NUMERICAL


def test_failed_check_exit_code(capsys):
    code, document = _json_run(capsys, [
        "verify", "--dx", "0.05", "--half-width", "6", "--n-list", "1", "--k-list", "1,2",
        "--paths", "5000", "--dt-mc", "1e-3", "--quiet"])
    assert code == EXIT_CHECK_FAILED
    assert document["passed"] is False
    failed = [check["name"] for check in document["checks"] if not check["passed"]]
    assert "phi_2_vs_series" in failed


def test_exit_code_comes_from_the_report(monkeypatch, capsys):
    report = RunReport(command="capacity")
    report.add_check("off", 1.0, 2.0, 0.1, oracle="exact")
    monkeypatch.setattr(cli, "cmd_capacity", lambda args: report)
    assert main(["capacity", "--set", '{"points": [1.0]}']) == report.exit_code == EXIT_CHECK_FAILED
    assert "FAILED: off" in capsys.readouterr().out


def test_grid_flags_reach_every_pde_command(capsys):
    code, document = _json_run(capsys, ["demo-nonqc", "--x0", "0", "--n-list", "1,4",
                                        "--dx", "0.05", "--dt", "1e-3"])
    assert code == EXIT_OK
    assert document["inputs"]["dt"] == 1e-3

    # dt above the stability limit 0.9·dx²/σ̄² is rejected by every grid-backed command
    unstable = ["--dx", "0.05", "--dt", "0.5", "--quiet"]
    assert main(["demo-nonqc"] + unstable) == EXIT_INVALID_INPUT
    assert main(["verify"] + unstable) == EXIT_INVALID_INPUT
    assert main(["pde-solve"] + unstable) == EXIT_INVALID_INPUT
    assert main(["mc", "--strategy", "constant:1", "--payoff", "neg-abs", "--pde-bound",
                 "--paths", "100"] + unstable) == EXIT_INVALID_INPUT


def test_pde_solve_outputs(capsys, tmp_path):
    code, document = _json_run(capsys, ["pde-solve", "--payoff", "constant:3", "--dx", "0.05"])
    assert code == EXIT_OK
    assert document["outputs"]["u_T_0"] == 3.0

    out = tmp_path / "grid.csv"
    assert main(["pde-solve", "--payoff", "neg-abs", "--dx", "0.05", "--half-width", "4",
                 "--output", "csv", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == "t,x,u"


def test_hitting_density_identities(capsys):
    code, document = _json_run(capsys, ["hitting-density", "--points", "20"])
    assert code == EXIT_OK
    assert {check["name"] for check in document["checks"]} == {"integral_vs_series", "total_mass"}
    assert abs(document["outputs"]["total_mass"] - 1.0) <= 1e-8


def test_mc_bang_bang_against_series(capsys):
    code, document = _json_run(capsys, ["mc", "--paths", "20000", "--dt-mc", "1e-3",
                                        "--allowance", "1e-2", "--workers", "2"])
    assert code == EXIT_OK
    assert document["outputs"]["estimate"]["n_paths"] == 20_000
    assert document["inputs"]["bridge"] is True


def test_mc_constant_strategy_below_pde(capsys):
    code, document = _json_run(capsys, ["mc", "--strategy", "constant:1", "--payoff", "square-cap:25",
                                        "--pde-bound", "--paths", "20000", "--allowance", "2e-2"])
    assert code == EXIT_OK
    assert document["checks"][0]["name"] == "mc_below_pde"


def test_demo_text_output(capsys):
    code = main(["demo-nonqc", "--x0", "0", "--n-list", "1,4", "--dx", "0.05"])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("== demo-nonqc ==")
    assert text.rstrip().endswith("OK")


def test_report_rendering(tmp_path):
    report = RunReport(command="demo", inputs={"a": float("inf")})
    report.add_check("close", 1.0, 1.0 + 1e-9, 1e-8, oracle="exact")
    report.add_check("far", 1.0, 2.0, 1e-8, oracle='"quoted"')
    report.add_flag("flag", True, oracle="property")

    assert not report.passed
    assert report.failed_checks == ["far"]
    assert report.exit_code == 1
    assert "FAILED: far" in report.render()
    assert report.to_dict()["inputs"] == {"a": float("inf")}
    assert json.loads(report.to_json())["inputs"] == {"a": "inf"}

    rows = report.to_csv(tmp_path / "checks.csv").splitlines()
    assert rows[0] == "name,passed,observed,expected,delta,tolerance,oracle"
    assert rows[2].startswith('"far",false,1.0,2.0,1.0,')
    assert rows[2].endswith(",\"'quoted'\"")
    assert rows[3] == '"flag",true,,,,,"property"'


def test_check_repr():
    assert repr(Check("flag", True, oracle="property")) == "[PASS] flag (property)"
    assert repr(Check("x", False, 1.0, 2.0, 0.5, "oracle")).startswith("[FAIL] x: observed=1")


def test_nan_observation_fails():
    report = RunReport(command="demo")
    assert not report.add_check("nan", float("nan"), 0.0, 1.0, oracle="finite").passed
