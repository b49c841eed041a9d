import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from powerdist.cli import main, parse_grid, parse_sequence
from powerdist.distance import DissimilarityMatrix
from powerdist.errors import MatrixError, PowerDistError
from powerdist.report import (fmt, matrix_to_csv, parse_matrix_csv,
                              profile_to_csv)
from powerdist.fixtures import AnalyticSpace, sample_matrix
from powerdist.power_triangle import sigma_profile


def test_parse_simple():
    m = parse_matrix_csv("0,1\n1,0")
    assert m.n == 2 and m[0, 1] == 1.0 and m.labels == ("0", "1")


def test_parse_errors():
    with pytest.raises(MatrixError, match="ragged row 2: expected 2 fields, got 1"):
        parse_matrix_csv("0,1\n1")
    with pytest.raises(MatrixError, match=r"symmetry violated at \(0,1\): 1 vs 2") as e:
        parse_matrix_csv("0,1\n2,0")
    assert (e.value.row, e.value.col) == (0, 1)
    with pytest.raises(MatrixError, match="non-numeric cell at row 2, column 2"):
        parse_matrix_csv("0,1\n1,x")
    with pytest.raises(MatrixError, match="non-numeric"):
        parse_matrix_csv("0,1,5\n1,0,nan\n5,nan,0")
    with pytest.raises(MatrixError, match="non-numeric"):
        parse_matrix_csv("0,1_0\n1_0,0")
    with pytest.raises(MatrixError):
        parse_matrix_csv("")
    with pytest.raises(MatrixError, match="data rows"):
        parse_matrix_csv("0,1\n1,0\n1,0\n1,0")


def test_parse_rejects_comma_radix():
    with pytest.raises(MatrixError):
        parse_matrix_csv('0,"1,5"\n"1,5",0')


def test_header_detection():
    m = parse_matrix_csv("a,b\n0,2\n2,0\n")
    assert m.labels == ("a", "b")
    m = parse_matrix_csv("0,1,4\n0,1,4\n1,0,1\n4,1,0\n")
    assert m.labels == ("0", "1", "4") and m[0, 2] == 4.0
    m = parse_matrix_csv(" 0 , 1.5e0 \n1.5, 0\n")
    assert m[0, 1] == 1.5


@settings(max_examples=60)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 9))
def test_matrix_round_trip_bit_exact(seed, n):
    rng = np.random.default_rng(seed)
    d = oracles.random_distance(rng, n) * 10.0 ** rng.integers(-5, 6)
    m = DissimilarityMatrix(d, labels=[f"p{i}" for i in range(n)])
    back = parse_matrix_csv(matrix_to_csv(m))
    assert back == m
    assert back.entries.tobytes() == m.entries.tobytes()


def test_fmt():
    assert fmt(math.inf) == "inf" and fmt(-math.inf) == "-inf"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3" and fmt(2.0) == "2"
    with pytest.raises(PowerDistError):
        fmt(math.nan)


def test_profile_csv_columns():
    m = sample_matrix(AnalyticSpace.EX321, [0, 1, 4])
    text = profile_to_csv(sigma_profile(m, [0.0, 1.0]), m.labels)
    lines = text.splitlines()
    assert lines[0] == "p,sigma_min,boundary_sigma,witness_x,witness_y,witness_z"
    assert lines[1] == "0,2,,0,4,1"
    assert lines[2] == "1,2,1,0,4,1"


def test_parse_grid():
    assert parse_grid("0:1:3,inf,-inf") == [-math.inf, 0.0, 0.5, 1.0, math.inf]
    assert parse_grid("2") == [2.0]
    for bad in ("0:1", "0:1:x", "1,1", "0:1:0", "", "a", "nan"):
        with pytest.raises(PowerDistError):
            parse_grid(bad)


def test_parse_sequence():
    assert parse_sequence("reciprocal")(2) == 0.5
    assert parse_sequence("affine:1,-1")(2) == 0.5
    assert parse_sequence("constant:3")(7) == 3.0
    for bad in ("affine:1", "foo", "constant:x"):
        with pytest.raises(PowerDistError):
            parse_sequence(bad)


@pytest.fixture
def ex321_csv(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text(matrix_to_csv(sample_matrix(AnalyticSpace.EX321, [0, 1, 4])))
    return str(path)


def test_check_exit_3_with_witness(ex321_csv, capsys):
    assert main(["check", "--input", ex321_csv, "--p", "1", "--sigma", "1"]) == 3
    out = capsys.readouterr().out
    assert "violated at (0,4,1) lhs 4 rhs 2" in out
    assert main(["check", "--input", ex321_csv, "--p", "1", "--sigma", "2"]) == 0


def test_check_preset_and_json(ex321_csv, capsys):
    assert main(["check", "--input", ex321_csv, "--preset", "relaxed-triangle",
                 "--sigma", "2", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["witnesses"]["check"]["holds"] is True
    assert main(["check", "--input", ex321_csv]) == 2


def test_boundary(capsys):
    assert main(["boundary", "--p", "1"]) == 0
    assert capsys.readouterr().out == "1\n"
    assert main(["boundary", "--p", "inf"]) == 0
    assert capsys.readouterr().out == "0.5\n"
    assert main(["boundary", "--sigma", "2"]) == 0
    assert capsys.readouterr().out == "0.5\n"
    assert main(["boundary", "--p", "0"]) == 2


def test_fixture_commands(capsys):
    assert main(["fixture", "ex324", "--curve-n", "10"]) == 0
    assert "0.0009765625" in capsys.readouterr().out
    for name in ("ex321", "ex322", "ex323"):
        assert main(["fixture", name]) == 0
    assert main(["fixture", "ex321", "--curve-n", "3"]) == 2


def test_fixture_sample_to_matrix(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["fixture", "ex323", "--sample", "0,0.5,1", "--write-matrix", str(out)]) == 0
    m = parse_matrix_csv(out.read_text())
    assert m.labels == ("0", "0.5", "1") and m[0, 2] == 2.0


def test_classify_deterministic(ex321_csv, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["classify", "--input", ex321_csv, "--output", str(a)]) == 3
    assert main(["classify", "--input", ex321_csv, "--output", str(b)]) == 3
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert list(rep) == ["input", "policy", "classification", "profile",
                         "witnesses", "certificates"]
    assert rep["classification"]["near_metric_sigma"] == "2"
    assert rep["input"]["n"] == "3"


def test_classify_metric_exits_zero(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text(matrix_to_csv(DissimilarityMatrix.from_points([0, 1, 3])))
    assert main(["classify", "--input", str(path), "--output", str(tmp_path / "o.json")]) == 0


def test_sigma_profile_command(ex321_csv, capsys):
    assert main(["sigma-profile", "--input", ex321_csv, "--grid", "1:2:2,inf"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("p,sigma_min") and len(lines) == 4
    assert main(["sigma-profile", "--input", ex321_csv, "--grid", "1,1"]) == 2


def test_validate_command(tmp_path, capsys):
    good = tmp_path / "g.csv"
    good.write_text("0,1\n1,0\n")
    assert main(["validate", "--input", str(good)]) == 0
    degen = tmp_path / "d.csv"
    degen.write_text("0,0\n0,0\n")
    assert main(["validate", "--input", str(degen)]) == 3
    bad = tmp_path / "b.csv"
    bad.write_text("0,1\n2,0\n")
    assert main(["validate", "--input", str(bad)]) == 2
    assert "symmetry violated at (0,1): 1 vs 2" in capsys.readouterr().err
    assert main(["validate", "--input", str(tmp_path / "missing.csv")]) == 2


def test_sequence_command(capsys):
    assert main(["sequence", "--space", "ex322", "--seq", "reciprocal", "--cauchy",
                 "--eps", "0.1", "0.01", "--n-max", "1000"]) == 3
    rep = json.loads(capsys.readouterr().out)
    cert = rep["certificates"][0]
    assert cert["verdict"] == "refuted" and cert["witness"]["d"] == "1"
    assert main(["sequence", "--space", "ex321", "--seq", "reciprocal", "--candidate", "4",
                 "--eps", "0.1", "0.01", "--n-max", "1000"]) == 0
    assert main(["sequence", "--space", "ex321", "--seq", "reciprocal"]) == 2


def test_transform_command(ex321_csv, capsys):
    assert main(["transform", "--input", ex321_csv, "--transform", "snowflake:0.5"]) == 0
    m = parse_matrix_csv(capsys.readouterr().out)
    assert m[0, 2] == 2.0
    assert main(["transform", "--input", ex321_csv, "--transform", "snowflake:3"]) == 2


def test_module_entry_point(ex321_csv):
    r = subprocess.run([sys.executable, "-m", "powerdist", "check", "--input", ex321_csv,
                        "--p", "1", "--sigma", "1"], capture_output=True, text=True)
    assert r.returncode == 3 and "(0,4,1)" in r.stdout


def test_stdin_input(monkeypatch, capsys):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO("0,1\n1,0\n"))
    assert main(["validate", "--input", "-"]) == 0
