import json
import os

import numpy as np
import pytest

from liact import cli
from liact.errors import ScenarioError
from liact.schema import validate_scenario


def shipped_path(name):
    return os.path.join(str(cli.scenario_dir()), f"{name}.json")


ALL_SCENARIOS = [
    "example1", "example2", "example3", "example4", "example4_closure",
    "example4_integer", "example5", "affine", "heisenberg",
    "sl2_incomplete", "supertranslation",
]


def test_all_shipped_scenarios_load():
    for name in ALL_SCENARIOS:
        scn = cli.load_scenario(shipped_path(name))
        assert scn.name == name


def test_shipped_scenarios_round_trip():
    for name in ALL_SCENARIOS:
        with open(shipped_path(name)) as fh:
            raw = json.load(fh)
        again = json.loads(json.dumps(raw, sort_keys=True))
        assert again == raw
        validate_scenario(again)


@pytest.mark.parametrize(
    "name,expected_code",
    [
        ("example5", 0),
        ("example1", 0),          # diagnosis of incompleteness is a result, not a failure
        ("example4", 3),          # act demanded where only holonomy-obstructed data exists
        ("example4_integer", 0),
        ("heisenberg", 0),
        ("affine", 0),
        ("sl2_incomplete", 0),
        ("supertranslation", 0),
    ],
)
def test_scenario_exit_codes(tmp_path, name, expected_code):
    code, report = cli.run_scenario(shipped_path(name), str(tmp_path))
    assert code == expected_code
    assert (tmp_path / f"{name}.report.json").exists()


def test_example5_report_contents(tmp_path):
    code, report = cli.run_scenario(shipped_path("example5"), str(tmp_path))
    assert code == 0
    kinds = [r["kind"] for r in report["results"]]
    assert kinds == ["validate", "act", "diagnose"]
    act_rec = report["results"][1]
    assert act_rec["value"][0] == pytest.approx(1.1, abs=1e-10)
    assert act_rec["status"] == "ok"
    diag = report["results"][2]
    assert diag["recover_rho"]["max_deviation"] <= 1e-6
    assert all(c["complete"] for c in diag["completeness"])


def test_example1_diagnose_reports_escape(tmp_path):
    code, report = cli.run_scenario(shipped_path("example1"), str(tmp_path))
    assert code == 0
    diag = next(r for r in report["results"] if r["kind"] == "diagnose")
    probe = diag["completeness"][0]
    assert not probe["complete"]
    assert probe["escape_time"] == pytest.approx(0.5, abs=1e-3)


def test_malformed_json_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x", }')
    code = cli.main(["run", str(bad), "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "byte offset" in err


def test_schema_violation_reports_pointer(tmp_path, capsys):
    with open(shipped_path("example5")) as fh:
        raw = json.load(fh)
    raw["tasks"][0]["kind"] = "bogus"
    bad = tmp_path / "bad_schema.json"
    bad.write_text(json.dumps(raw))
    code = cli.main(["run", str(bad), "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "/tasks/0/kind" in err


def test_cross_reference_errors():
    with open(shipped_path("example5")) as fh:
        raw = json.load(fh)
    raw["rho"] = [["1.0"], ["1.0"]]
    with pytest.raises(ScenarioError):
        cli.Scenario(raw)


def test_leaf_csv_slope_and_format(tmp_path):
    code, report = cli.run_scenario(shipped_path("example2"), str(tmp_path))
    assert code == 0
    csv_path = tmp_path / "example2_leaf.csv"
    text = csv_path.read_bytes().decode()
    assert text.endswith("\r\n")
    lines = text.strip().split("\r\n")
    assert lines[0] == "t,g1,x"
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    dg = np.diff(rows[:, 1])
    dm = np.diff(rows[:, 2])
    assert np.all(np.abs(dm / dg - 0.5) <= 1e-6)


def test_torus_closure_csv(tmp_path):
    code, report = cli.run_scenario(shipped_path("example4_closure"), str(tmp_path))
    assert code == 0
    leaf = next(r for r in report["results"] if r["kind"] == "leaf")
    assert leaf["closure_distance"] <= 1e-6
    assert leaf["m_winding"] == [2]
    assert leaf["g_winding"] == 3


def test_supertranslation_souls_companion(tmp_path):
    code, report = cli.run_scenario(shipped_path("supertranslation"), str(tmp_path))
    assert code == 0
    souls = json.loads((tmp_path / "supertranslation_orbit.souls.json").read_text())
    assert souls["columns"] == ["x", "th"]
    last = souls["rows"][-1]
    assert last[0]["terms"] == [
        {"coeff": 0.3, "subset": []},
        {"coeff": 1.0, "subset": [0, 1]},
    ]


def test_reports_deterministic_across_runs(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for name in ALL_SCENARIOS:
        cli.run_scenario(shipped_path(name), str(out1))
        cli.run_scenario(shipped_path(name), str(out2))
        b1 = (out1 / f"{name}.report.json").read_bytes()
        b2 = (out2 / f"{name}.report.json").read_bytes()
        assert b1 == b2, name


def test_jobs_flag_keeps_reports_identical(tmp_path):
    out1 = tmp_path / "serial"
    out2 = tmp_path / "parallel"
    cli.run_scenario(shipped_path("affine"), str(out1), jobs=1)
    cli.run_scenario(shipped_path("affine"), str(out2), jobs=4)
    assert (out1 / "affine.report.json").read_bytes() == (
        out2 / "affine.report.json"
    ).read_bytes()


def test_seed_override_changes_report(tmp_path):
    code, rep0 = cli.run_scenario(shipped_path("affine"), str(tmp_path), seed=0)
    code, rep1 = cli.run_scenario(shipped_path("affine"), str(tmp_path), seed=1)
    assert rep0["seed"] == 0 and rep1["seed"] == 1


def test_scenarios_listing(capsys):
    assert cli.main(["scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ALL_SCENARIOS:
        assert f"{name}.json" in out
