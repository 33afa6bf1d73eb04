import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest

import mldegree.cli as cli
from mldegree.cli import run
from mldegree.core import parse_document, serialize_system

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "quartic_cubic.json"


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_validate(capsys):
    code, rep, _ = call(capsys, "validate", FIXTURE)
    assert code == 0
    assert rep["valid"] and rep["n"] == 2 and rep["k"] == 1 and rep["terms"] == [3]
    assert rep["hat_form"] is False and rep["exact"] is True


def test_validate_negative_exponent_names_polynomial(capsys, tmp_path):
    bad = write(tmp_path, "bad.json", {"n": 2, "polynomials": [
        {"terms": [{"exponent": [1, 0], "re": "1"}]},
        {"terms": [{"exponent": [0, -2], "re": "1"}]}]})
    code, rep, err = call(capsys, "validate", bad)
    assert code == 1 and rep is None
    assert "polynomials[1]" in err and "negative exponent" in err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["validate"], ["validate", "/no/such/file.json"],
                                  ["classify", str(FIXTURE)], ["classify", str(FIXTURE), "--weight", "1,x,3"],
                                  ["classify", str(FIXTURE), "--weight", "1,2"],
                                  ["classify", str(FIXTURE), "--radius", "0"],
                                  ["ml-degree", str(FIXTURE), "--min-step", "0"],
                                  ["mixed-volume", str(FIXTURE)],
                                  ["bkk-check", "--trials", "0"]])
def test_usage_errors(capsys, argv):
    code, rep, err = call(capsys, *argv)
    assert code == 1 and rep is None and err


def test_ml_degree_both(capsys):
    code, rep, _ = call(capsys, "ml-degree", FIXTURE, "--method", "both", "--seed", 3)
    assert code == 0
    assert rep["mixed_volume"] == 12 and rep["count"] == 12 and rep["agreement"] is True
    assert rep["ml_degree"] == 12 and rep["seed"] == 3
    assert rep["newton_polytopes"][0] == [[0, 0, 0], [4, 0, 1]]
    assert rep["config"]["newton_tolerance"] == 1e-10
    assert rep["u_origin"] == "sampled"


@pytest.mark.parametrize("method, key", [("mixed-volume", "mixed_volume"), ("solve", "count")])
def test_ml_degree_single_methods(capsys, method, key):
    code, rep, _ = call(capsys, "ml-degree", FIXTURE, "--method", method)
    assert code == 0 and rep[key] == 12 and rep["ml_degree"] == 12


def test_report_embeds_digest_and_is_reproducible(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert run(["ml-degree", str(FIXTURE), "--seed", "7", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert run(["ml-degree", str(FIXTURE), "--seed", "7", "--out", str(out)]) == 0
    assert out.read_bytes() == first
    assert capsys.readouterr().out == ""
    rep = json.loads(first)
    doc = parse_document(FIXTURE.read_bytes())
    assert rep["input_digest"] == hashlib.sha256(serialize_system(doc.system, doc.u, doc.seed).encode()).hexdigest()
    assert rep["arguments"]["seed"] == 7


def test_seed_from_file_and_data_from_file(capsys, tmp_path):
    data = json.loads(FIXTURE.read_text())
    data.update(seed=5, u=["7/10", "13/10"])
    p = write(tmp_path, "s.json", data)
    code, rep, _ = call(capsys, "ml-degree", p, "--method", "mixed-volume")
    assert code == 0 and rep["seed"] == 5 and rep["u"] == ["7/10", "13/10"] and rep["u_origin"] == "input"
    code, rep, _ = call(capsys, "ml-degree", p, "--method", "mixed-volume", "--seed", 1)
    assert rep["seed"] == 1


def test_ml_system_output_is_a_system_file(capsys, tmp_path):
    code, rep, _ = call(capsys, "ml-system", FIXTURE)
    assert code == 0 and rep["n"] == 3 and len(rep["polynomials"]) == 3
    assert rep["variables"] == ["x1", "x2", "lambda1"]
    p = write(tmp_path, "ml.json", rep)
    code, again, _ = call(capsys, "validate", p)
    assert code == 0 and again["n"] == 3 and again["k"] == 3


def test_mixed_volume_of_square_system(capsys, tmp_path):
    conics = write(tmp_path, "c.json", {"n": 2, "polynomials": [
        {"terms": [{"exponent": [2, 0], "re": "1"}, {"exponent": [0, 2], "re": "1"}, {"exponent": [0, 0], "re": "-5"}]},
        {"terms": [{"exponent": [1, 1], "re": "1"}, {"exponent": [0, 0], "re": "-2"}]}]})
    code, rep, _ = call(capsys, "mixed-volume", conics)
    assert code == 0 and rep["ie"] == rep["cells_total"] == rep["mixed_volume"] == 4
    assert sum(c["det"] for c in rep["cells"]) == 4
    code, rep, _ = call(capsys, "mixed-volume", conics, "--method", "ie")
    assert rep["mixed_volume"] == 4 and "cells" not in rep


@pytest.mark.parametrize("weight, case", [("-3,14,3", 1), ("-3,-4,3", 2), ("-3,12,3", 3)])
def test_classify_weights(capsys, weight, case):
    code, rep, _ = call(capsys, "classify", FIXTURE, "--weight", weight)
    assert code == 0 and rep["hat_applied"] is True
    assert rep["classification"]["case"] == case
    if case == 3:
        assert rep["certificate"] == {"vector": [-3, 12, 3], "matrix_shape": [3, 1], "verified": True}


def test_classify_scan(capsys):
    code, rep, _ = call(capsys, "classify", FIXTURE, "--radius", 2)
    assert code == 0 and rep["unclassified"] == 0 and rep["inconsistent"] == []
    assert sum(rep["counts"].values()) == 5**3 - 1 == len(rep["rows"])


def test_bkk_check(capsys):
    code, rep, _ = call(capsys, "bkk-check", "--trials", 3, "--seed", 2)
    assert code == 0 and rep["passed"] == rep["total"] == 3
    assert [t["seed"] for t in rep["trials"]] == [2 * 1_000_003 + i for i in range(3)]


def test_anomaly_exit_code(capsys, monkeypatch):
    real = cli.solve_ml_system

    def short(*args, **kwargs):
        rep = real(*args, **kwargs)
        rep.solutions = rep.solutions[:-1]
        return rep

    monkeypatch.setattr(cli, "solve_ml_system", short)
    code, rep, err = call(capsys, "ml-degree", FIXTURE)
    assert code == 2 and rep["agreement"] is False and "anomaly" in err


def test_engine_disagreement_exit_code(capsys, monkeypatch, tmp_path):
    p = write(tmp_path, "sq.json", {"n": 1, "polynomials": [
        {"terms": [{"exponent": [3], "re": "1"}, {"exponent": [0], "re": "1"}]}]})
    monkeypatch.setattr(cli, "mixed_volume_ie", lambda polys: 7)
    code, rep, _ = call(capsys, "mixed-volume", p)
    assert code == 3 and rep["error"] == "engines disagree"

    import mldegree.mixed_volume as mv
    monkeypatch.setattr(mv, "mixed_volume_ie", lambda polys: 7)
    code, rep, err = call(capsys, "ml-degree", FIXTURE, "--method", "mixed-volume")
    assert code == 3 and "invariant" in err


def test_module_entry_point(tmp_path):
    out = tmp_path / "v.json"
    proc = subprocess.run([sys.executable, "-m", "mldegree", "validate", str(FIXTURE), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(out.read_text())["command"] == "validate"
