#!/usr/bin/env python3
"""
Test Script for scenario validation, report files and the dsgravity command line
"""

import json

import pytest
from click.testing import CliRunner

from desitter_gravity import __version__
from desitter_gravity.cli import main
from desitter_gravity.exceptions import ConfigError, ReportError
from desitter_gravity.reporting import emit, report_columns
from desitter_gravity.scenarios import (
    Check,
    RunReport,
    ScenarioName,
    ScenarioRunner,
    load_bodies_file,
    load_scenario_file,
    run_scenario,
    validate_scenario,
)


# ===================
# Validation
# ===================

def _fields(excinfo):
    return [e["field"] for e in excinfo.value.errors]


def test_unknown_scenario():
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario({"scenario": "wormhole"})
    assert _fields(excinfo) == ["scenario"]


@pytest.mark.parametrize("scenario, parameters, field", [
    ("algebra", {"radius": -1.0}, "parameters.radius"),
    ("algebra", {"bogus": 1}, "parameters.bogus"),
    ("orbit", {"mass": "3 s"}, "parameters.mass"),
    ("cosmo", {"mode": "so5x"}, "parameters.mode"),
])
def test_parameter_errors_name_the_field(scenario, parameters, field):
    with pytest.raises(ConfigError) as excinfo:
        validate_scenario({"scenario": scenario, "parameters": parameters})
    assert field in _fields(excinfo)


def test_defaults_fill_parameters():
    cfg, params = validate_scenario({"scenario": "cosmo", "parameters": {"t0": 2.0}})
    assert cfg.scenario is ScenarioName.COSMO
    assert cfg.output.format == "json"
    assert params.time_range == (0.02, 20.0)


def test_lattice_spacing_sets_base_cells():
    _, params = validate_scenario({"scenario": "lattice", "parameters": {"eps": 0.25}})
    assert params.base_cells == 4
    with pytest.raises(ConfigError):
        validate_scenario({"scenario": "lattice", "parameters": {"eps": 0.3}})


def test_orbit_from_semimajor_axis_and_eccentricity():
    _, params = validate_scenario({"scenario": "orbit", "parameters": {"a": "2000 km", "e": 0.25}})
    r_peri, r_apo = params.turning_points()
    assert r_peri == pytest.approx(1.5e6)
    assert r_apo == pytest.approx(2.5e6)
    with pytest.raises(ConfigError):
        validate_scenario({"scenario": "orbit", "parameters": {"r_peri": "1500 km"}})
    with pytest.raises(ConfigError):
        validate_scenario({"scenario": "orbit", "parameters": {"e": 1.0}})


def test_custom_field_needs_a_file(tmp_path):
    with pytest.raises(ConfigError):
        validate_scenario({"scenario": "field", "parameters": {"scenario": "custom"}})
    with pytest.raises(ConfigError):
        validate_scenario({"scenario": "field", "parameters": {"scenario": "custom",
                                                               "custom_file": str(tmp_path / "none.json")}})
    with pytest.raises(ConfigError):
        validate_scenario({"scenario": "field", "parameters": {"scenario": "galaxy"}})


def test_load_bodies_file(tmp_path):
    body = {"mass": "1 solMass", "position": ["0 m", "0 m", "0 m"]}
    (tmp_path / "list.json").write_text(json.dumps([body]))
    (tmp_path / "wrapped.json").write_text(json.dumps({"bodies": [body, body]}))
    assert load_bodies_file(str(tmp_path / "list.json")) == [body]
    assert len(load_bodies_file(str(tmp_path / "wrapped.json"))) == 2
    (tmp_path / "empty.json").write_text("[]")
    (tmp_path / "unitless.json").write_text(json.dumps([{"mass": 1.0, "position": ["0 m", "0 m", "0 m"]}]))
    for name in ("empty.json", "unitless.json", "missing.json"):
        with pytest.raises(ConfigError):
            load_bodies_file(str(tmp_path / name))


def test_load_scenario_file_flags_win(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"scenario": "algebra", "parameters": {"radius": 2.0, "mode": "so5"}}))
    data = load_scenario_file(str(path), {"radius": 3.0})
    assert data["parameters"] == {"radius": 3.0, "mode": "so5"}
    (tmp_path / "broken.json").write_text("{not json")
    with pytest.raises(ConfigError):
        load_scenario_file(str(tmp_path / "broken.json"))
    with pytest.raises(ConfigError):
        load_scenario_file(str(tmp_path / "missing.json"))


# ===================
# Checks and reports
# ===================

@pytest.mark.parametrize("comparison, value, oracle, tolerance, expected", [
    ("absolute", 1.05, 1.0, 0.1, True),
    ("absolute", 1.2, 1.0, 0.1, False),
    ("relative", 101.0, 100.0, 0.02, True),
    ("relative", 103.0, 100.0, 0.02, False),
    ("at_least", 3.9, 3.8, 0.0, True),
    ("at_least", 3.7, 3.8, 0.0, False),
    ("at_most", 0.1, 0.5, 0.0, True),
    ("at_most", 0.6, 0.5, 0.0, False),
    ("absolute", float("nan"), 0.0, 1.0, False),
])
def test_check_comparisons(comparison, value, oracle, tolerance, expected):
    check = Check(name="c", value=value, oracle=oracle, tolerance=tolerance, comparison=comparison)
    assert check.passed is expected
    assert check.to_dict()["passed"] is expected


def test_report_layout():
    report = RunReport(scenario=ScenarioName.ALGEBRA, seed=3, inputs={"mode": "desitter"},
                       outputs={"sigma": -1.0}, rows=[{"x": 1.0}],
                       checks=[Check(name="c", value=0.0, oracle=0.0, tolerance=0.0)], wall_time=1.5)
    data = report.to_dict()
    assert list(data) == ["schema_version", "inputs", "outputs", "checks"]
    assert data["inputs"] == {"scenario": "algebra", "seed": 3, "parameters": {"mode": "desitter"}}
    assert data["outputs"]["rows"] == [{"x": 1.0}]
    assert "wall_time" not in json.dumps(data)
    assert report.passed
    report.error = "rejected"
    assert not report.passed
    assert report.to_dict()["outputs"]["error"] == "rejected"


def test_algebra_scenario_passes():
    cfg, params = validate_scenario({"scenario": "algebra", "parameters": {"mode": "poincare"}})
    report = run_scenario(cfg, params)
    assert report.passed
    assert report.rows
    assert report_columns(report) == ["relation", "residual"]


def test_rejected_orbit_gives_failed_report():
    cfg, params = validate_scenario({"scenario": "orbit", "parameters": {"r_peri": "3000 km", "r_apo": "1477 km"}})
    report = run_scenario(cfg, params)
    print(f"✅ Rejected orbit: {report.error}")
    assert report.error is not None
    assert not report.passed


# ===================
# Report files
# ===================

def _table_report(rows):
    return RunReport(scenario=ScenarioName.CLASSIC, columns=["name", "value", "passed"], rows=rows)


def test_emit_csv(tmp_path):
    report = _table_report([{"name": "redshift", "value": 0.25, "passed": True}])
    [path] = emit(report, "csv", tmp_path / "nested" / "classic")
    assert path == tmp_path / "nested" / "classic.csv"
    assert path.read_bytes() == b"name,value,passed\r\nredshift,0.25,true\r\n"


def test_emit_csv_without_rows(tmp_path):
    [path] = emit(_table_report([]), "csv", tmp_path / "empty")
    assert path.read_bytes() == b"name,value,passed\r\n"


def test_emit_json(tmp_path):
    [path] = emit(_table_report([{"name": "redshift", "value": 0.25, "passed": False}]), "json", tmp_path / "out")
    text = path.read_text(encoding="utf-8")
    assert text.endswith("}\n")
    assert json.loads(text)["schema_version"] == "1.0"


def test_emit_errors(tmp_path):
    with pytest.raises(ReportError):
        emit(_table_report([]), "xml", tmp_path / "out")
    blocker = tmp_path / "file.txt"
    blocker.write_text("")
    with pytest.raises(ReportError) as excinfo:
        emit(_table_report([]), "csv", blocker / "sub" / "out")
    assert "out.csv" in excinfo.value.path


# ===================
# Runner
# ===================

def test_runner_writes_into_output_dir(isolated_config, tmp_path):
    runner = ScenarioRunner(str(isolated_config))
    report, written = runner.run({"scenario": "algebra", "output": {"path": "alg", "format": "json"}})
    assert written == [tmp_path / "results" / "alg.json"]
    assert report.outputs["coupling_ag"] == 1.0
    assert json.loads(written[0].read_text())["outputs"]["coupling_ag"] == 1.0


def test_output_dir_environment_override(isolated_config, tmp_path, monkeypatch):
    monkeypatch.setenv("DSGRAVITY_OUTPUT_DIR", str(tmp_path / "env"))
    runner = ScenarioRunner(str(isolated_config))
    _, written = runner.run({"scenario": "algebra", "output": {"path": "somewhere/alg", "format": "csv"}})
    assert written == [tmp_path / "env" / "alg.csv"]


def test_invalid_runner_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"seed": "not a number"}')
    with pytest.raises(ConfigError):
        ScenarioRunner(str(path))


# ===================
# Command line
# ===================

def test_version():
    result = CliRunner().invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "dsgravity" in result.output
    assert __version__ in result.output


def test_algebra_verify_command(isolated_config, tmp_path):
    out = tmp_path / "alg"
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "algebra", "verify", "--mode", "desitter",
                                       "--output", str(out), "--format", "json"])
    print(result.output)
    assert result.exit_code == 0
    assert (tmp_path / "alg.json").exists()


@pytest.mark.parametrize("args", [
    ["algebra", "verify", "--mode", "anti"],
    ["algebra", "verify", "--radius", "-1"],
])
def test_invalid_input_exits_2(isolated_config, tmp_path, args):
    result = CliRunner().invoke(main, ["--config", str(isolated_config)] + args + ["--output", str(tmp_path / "x")])
    assert result.exit_code == 2


def test_rejected_orbit_exits_1(isolated_config, tmp_path):
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "orbit", "--r-peri", "3000 km",
                                       "--r-apo", "1477 km", "--output", str(tmp_path / "orbit")])
    assert result.exit_code == 1
    assert (tmp_path / "orbit.json").exists()


def test_cosmo_compare_command(isolated_config, tmp_path):
    out = tmp_path / "compare"
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "cosmo", "--rho0", "0.01", "--from", "0.5",
                                       "--to", "20", "--samples", "5", "--output", str(out), "--format", "csv",
                                       "compare"])
    assert result.exit_code == 0
    header = (tmp_path / "compare.csv").read_text().splitlines()[0]
    assert header.startswith("t,a,b_desitter,b_poincare")


def test_pulsar_sweep_command(isolated_config, tmp_path):
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "pulsar", "--output", str(tmp_path / "sweep"),
                                       "sweep", "--eccentricities", "0,0.3", "--samples-per-orbit", "512"])
    assert result.exit_code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "e,dEdt_numeric,dEdt_closed_form,relative_error,pdot"
    assert len(lines) == 3


def test_orbit_command_reports_precession_and_period(isolated_config, tmp_path):
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "orbit", "--a", "2000 km", "--e", "0.25",
                                       "--orbits", "3", "--samples", "50", "--output", str(tmp_path / "orbit")])
    print(result.output)
    assert result.exit_code == 0
    outputs = json.loads((tmp_path / "orbit.json").read_text())["outputs"]
    print(f"✅ Precession {outputs['precession_rad_per_orbit']:.4e} rad, period {outputs['period']:.4e} s")
    assert outputs["eccentricity"] == pytest.approx(0.25)
    assert outputs["precession_rad_per_orbit"] > 0
    assert outputs["period"] > 0


def test_lattice_converge_with_spacing(isolated_config, tmp_path):
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "lattice", "converge", "--eps", "0.5",
                                       "--levels", "2", "--resolution", "8", "--output", str(tmp_path / "lattice")])
    assert result.exit_code in (0, 1)
    data = json.loads((tmp_path / "lattice.json").read_text())
    assert data["inputs"]["parameters"]["base_cells"] == 2
    bad = CliRunner().invoke(main, ["--config", str(isolated_config), "lattice", "converge", "--eps", "0.3",
                                    "--output", str(tmp_path / "bad")])
    assert bad.exit_code == 2


@pytest.mark.parametrize("scenario, column", [("cosmo", "residual_rw2"), ("spherical", "residual_G00")])
def test_field_residual_scenarios(isolated_config, tmp_path, scenario, column):
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "field", "residual", "--scenario", scenario,
                                       "--refine", "3", "--output", str(tmp_path / "field"), "--format", "csv"])
    assert result.exit_code == 0
    header = (tmp_path / "field.csv").read_text().splitlines()[0]
    assert column in header.split(",")


def test_field_residual_custom_file(isolated_config, tmp_path):
    shape = [1, 9, 1, 1]
    flat = [[[[[[-1.0 if i == j == 0 else float(i == j) for j in range(4)] for i in range(4)]]] for _ in range(9)]]
    custom = tmp_path / "flat.json"
    custom.write_text(json.dumps({"grid": {"origin": [0, 0, 0, 0], "spacing": [1, 0.125, 1, 1], "shape": shape},
                                  "potential": {"G": flat}}))
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "field", "residual", "--scenario", "custom",
                                       "--custom", str(custom), "--output", str(tmp_path / "custom")])
    print(result.output)
    assert result.exit_code == 0
    data = json.loads((tmp_path / "custom.json").read_text())
    assert data["outputs"]["scenario"] == "custom"
    assert [c["name"] for c in data["checks"]] == ["residual_rank2", "residual_rank3"]
    missing = CliRunner().invoke(main, ["--config", str(isolated_config), "field", "residual", "--scenario", "custom",
                                        "--output", str(tmp_path / "none")])
    assert missing.exit_code == 2


def test_pn_field_with_bodies_and_points(isolated_config, tmp_path):
    bodies = tmp_path / "bodies.json"
    bodies.write_text(json.dumps([
        {"mass": "1 solMass", "position": ["-1e9 m", "0 m", "0 m"], "velocity": ["0 m/s", "-1e5 m/s", "0 m/s"]},
        {"mass": "1 solMass", "position": ["1e9 m", "0 m", "0 m"], "velocity": ["0 m/s", "1e5 m/s", "0 m/s"]},
    ]))
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "pn", "field", "--bodies", str(bodies),
                                       "--at", "0,3e9,0", "--at", "4e9,1e9,0", "--output", str(tmp_path / "pn")])
    print(result.output)
    assert result.exit_code == 0
    data = json.loads((tmp_path / "pn.json").read_text())
    assert len(data["inputs"]["parameters"]["points"]) == 2
    assert data["inputs"]["parameters"]["bodies"][0]["mass"] == "1 solMass"


@pytest.mark.parametrize("args", [
    ["--at", "1,2"],
    ["--at", "1,2,z"],
])
def test_pn_field_bad_point_exits_2(isolated_config, tmp_path, args):
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "pn", "field"] + args
                                + ["--output", str(tmp_path / "pn")])
    assert result.exit_code == 2


def test_pn_field_bad_bodies_file_exits_2(isolated_config, tmp_path):
    bodies = tmp_path / "bodies.json"
    bodies.write_text('{"bodies": []}')
    result = CliRunner().invoke(main, ["--config", str(isolated_config), "pn", "field", "--bodies", str(bodies),
                                       "--output", str(tmp_path / "pn")])
    assert result.exit_code == 2
