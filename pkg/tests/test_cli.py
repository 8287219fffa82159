import json
from pathlib import Path

import pytest

from gmboundary.cli import run

CFG = str(Path(__file__).resolve().parents[1] / "configs" / "two_block.cfg")


def report(tmp_path, argv):
    code = run(argv + ["--out", str(tmp_path)])
    return code, json.loads((tmp_path / "report.json").read_text())


def test_validate(tmp_path):
    code, rep = report(tmp_path, ["validate", "--graph", CFG])
    assert code == 0 and rep["ok"] and rep["schema"] == "gmboundary.validate/1"


def test_validate_bad_graph(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    doc = json.loads(Path(CFG).read_text())
    doc["edges"][0]["matrix"] = [[1, 0], [0, 1]]
    bad.write_text(json.dumps(doc))
    assert run(["validate", "--graph", str(bad)]) == 2
    doc["edges"][0]["glue"] = 1
    bad.write_text(json.dumps(doc))
    assert run(["validate", "--graph", str(bad)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValidationError"


def test_stab_check(tmp_path):
    code, rep = report(tmp_path, ["stab-check", "--graph", CFG, "--dist", "2", "--radius", "4"])
    assert code == 0 and rep["structure"] == "cyclic" and rep["generator"] == "z"
    code, rep = report(tmp_path, ["stab-check", "--graph", CFG, "--dist", "3", "--radius", "3"])
    assert code == 0 and rep["structure"] == "trivial"


def test_seed_required(capsys):
    assert run(["walk", "--graph", CFG]) == 1
    assert "seed" in json.loads(capsys.readouterr().err)["message"]


def test_walk_is_reproducible(tmp_path):
    argv = ["walk", "--graph", CFG, "--steps", "300", "--walks", "30", "--depth", "3", "--patience", "50",
            "--seed", "7"]
    code, rep = report(tmp_path / "a", argv)
    assert code == 0 and rep["undecided_fraction"] < 0.01
    report(tmp_path / "b", argv + ["--jobs", "2"])
    for name in ("report.json", "walks.csv", "histogram.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_harmonic_fail_code(tmp_path):
    argv = ["harmonic", "--graph", CFG, "--measure", "preset:uniform", "--steps", "20", "--walks", "10",
            "--depth", "5", "--patience", "15", "--seed", "1"]
    code, rep = report(tmp_path, argv)
    assert code == 2 and rep["undecided_fraction"] > 0.01


def test_stationarity_cli(tmp_path):
    argv = ["stationarity", "--measure", "preset:hyperbolic", "--walks", "100", "--steps", "30", "--depth", "2",
            "--patience", "10", "--seed", "1"]
    code, rep = report(tmp_path, argv)
    assert code == 0 and rep["status"] == "pass"
    argv[4] = "20"
    assert run(argv) == 3


def test_entropy_and_atlas(tmp_path):
    code, rep = report(tmp_path, ["entropy", "--measure", "preset:f2", "--steps", "50", "--walks", "200",
                                  "--seed", "1"])
    assert code == 0 and 0.3 < rep["drift"] < 0.7
    code, rep = report(tmp_path, ["atlas", "--tag", "Nil"])
    assert code == 0 and rep["triviality"] == "trivial"
    assert run(["atlas", "--tag", "Flat"]) == 1


def test_first_return_cli(tmp_path):
    code, rep = report(tmp_path, ["first-return", "--measure", "preset:z", "--quotient", "mod:2",
                                  "--walks", "500", "--seed", "3"])
    assert code == 0 and rep["mean_return_time"] == 2
    assert {e["element"]: e["mass"] for e in rep["exact"]} == {"(0)": "1/2", "(2)": "1/4", "(-2)": "1/4"}
    q = tmp_path / "q.json"
    q.write_text(json.dumps({"modulus": 2, "values": {"c1": 0, "c1^-1": 0, "c2": 1, "c2^-1": 1, "z": 0, "z^-1": 0,
                                                      "1 | e1 | c2 | e1^-1 | 1": 1,
                                                      "1 | e1 | c2^-1 | e1^-1 | 1": 1}}))
    code, rep = report(tmp_path, ["first-return", "--graph", CFG, "--quotient", str(q), "--walks", "200",
                                  "--seed", "3", "--exact-depth", "3"])
    assert code == 0 and rep["mean_return_time"] > 1
