import csv
import io
import json
import os
import subprocess
import sys

import pytest

from fracyam import cli
from fracyam.report import Status, VerificationReport, emit, to_json
from fracyam.suites import run_suite


def _reports():
    return [VerificationReport("a.one", {"n": 3}, 1.0, 1.0, 1e-6, Status.PASS, 5),
            VerificationReport("b.two", {"n": 4, "gamma": 0.5}, [1.0, 2.0], "none", 0.0, Status.FAIL, 7)]


def test_json_round_trip():
    reps = _reports()
    back = [VerificationReport.from_dict(d) for d in json.loads(emit(reps, "json"))]
    assert back == reps


def test_json_has_exactly_the_report_fields():
    row = json.loads(emit(_reports(), "json"))[0]
    assert list(row) == ["check_id", "params", "computed", "reference", "tolerance", "status", "runtime_ms"]


def test_empty_lists():
    assert json.loads(emit([], "json")) == []
    assert list(csv.reader(io.StringIO(emit([], "csv")))) == [list(json.loads(to_json(_reports()))[0])]


def test_csv_columns_constant():
    rows = list(csv.reader(io.StringIO(emit(_reports(), "csv"))))
    assert len({len(r) for r in rows}) == 1


def test_text_table():
    text = emit(_reports(), "text")
    assert "a.one" in text and "fail" in text


def test_pass_must_respect_tolerance():
    with pytest.raises(ValueError):
        VerificationReport("x", {}, 2.0, 1.0, 1e-6, Status.PASS)


def test_constants_suite_all_pass_sorted_unique():
    reps = run_suite("constants")
    ids = [r.check_id for r in reps]
    assert ids == sorted(ids) and len(set(ids)) == len(ids)
    assert all(r.status is Status.PASS for r in reps)


def test_unknown_suite():
    from fracyam.errors import DomainError
    with pytest.raises(DomainError):
        run_suite("nope")


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["constants", "--format", "text"]) == 0
    assert cli.main(["no-such-command"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[not_a_suite]\nx = 1\n")
    assert cli.main(["constants", "--config", str(bad)]) == 2
    garbage = tmp_path / "garbage.cfg"
    garbage.write_text("x = 1 without a section\n")
    assert cli.main(["constants", "--config", str(garbage)]) == 2
    assert cli.main(["constants", "--out", str(tmp_path / "missing" / "out.json")]) == 3


def test_cli_config_overrides(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[constants]\npoints = [(3, 0.5)]\n")
    out = tmp_path / "r.json"
    assert cli.main(["constants", "--config", str(cfg), "--out", str(out)]) == 0
    ids = [r["check_id"] for r in json.loads(out.read_text())]
    assert "constants.bubble_mass@n=3,gamma=0.5" in ids
    assert not any("gamma=1.5" in i and "bubble_mass" in i for i in ids)


def test_cli_thread_cap_validation(monkeypatch):
    monkeypatch.setenv("FRACYAM_THREADS", "zero")
    assert cli.main(["constants"]) == 2


def test_cli_constant_set(capsys):
    assert cli.main(["constants", "--n", "3", "--gamma", "0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["kappa_gamma"] == pytest.approx(1.0)


def test_cli_integrate_and_profile(tmp_path, capsys):
    assert cli.main(["integrate", "--n", "3", "--gamma", "0.5"]) == 0
    out = json.loads(capsys.readouterr().out)
    from fracyam.constants import ParamPoint, constants
    assert out["value"] == pytest.approx(constants(ParamPoint(3, 0.5)).Y_sphere ** 3, rel=1e-6)
    path = tmp_path / "prof.csv"
    assert cli.main(["dump-profile", "--n", "7", "--gamma", "1.5", "--closed-form", "--nr", "5", "--nx", "4",
                     "--out", str(path)]) == 0
    assert path.read_text().splitlines()[0] == "r,xN,value"
    assert cli.main(["dump-profile", "--closed-form"]) == 2


def test_cli_c4_csv(tmp_path):
    path = tmp_path / "scan.csv"
    assert cli.main(["c4-scan", "--steps", "3", "--format", "csv", "--out", str(path)]) == 0
    assert path.read_text().startswith("n,gamma,c4_quad,i1_plus_i2,status")


def test_cli_minimize(tmp_path, capsys):
    prof = tmp_path / "trace.csv"
    assert cli.main(["minimize", "--init", "bubble", "--profile-csv", str(prof)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["rel_gap"]) < 1e-6
    assert prof.read_text().startswith("r,value")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fracyam", "constants", "--format", "csv"], capture_output=True,
                         text=True, env={**os.environ, "FRACYAM_THREADS": "1"})
    assert res.returncode == 0
    assert res.stdout.startswith("check_id,params")


def test_plots_written(tmp_path):
    from fracyam.plots import write_plots
    rep = VerificationReport("x.sweep", {}, 1.0, "none", 0.0, Status.PASS,
                             details={"eps": [0.1, 0.05, 0.025], "normalized": [1.0, 1.1, 1.15]})
    paths = write_plots([rep], str(tmp_path))
    assert len(paths) == 1 and open(paths[0]).read().startswith("<svg")
