import json

import pytest

from g2inv import catalog
from g2inv.cli import dumps, run
from g2inv.transform import apply_to_metric, make_transform


@pytest.fixture(scope="module")
def vdb_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "vdb.json"
    assert run(["catalog", "vdb", "--emit", str(path)]) == 0
    return str(path)


@pytest.fixture(scope="module")
def kundu_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "lk.json"
    assert run(["catalog", "lambda_kundu", "--param", "c=1",
                "--param", "Lambda=3", "--emit", str(path)]) == 0
    return str(path)


def test_catalog_lists_names(capsys):
    assert run(["catalog", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "vdb" in out["names"]


def test_catalog_unknown_name_is_usage_error(capsys):
    assert run(["catalog", "nope"]) == 2


def test_invariants_at_point(vdb_file, capsys):
    assert run(["invariants", vdb_file, "--at", "0.5,1.0", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["fundamentals"]["C_rho"] == pytest.approx(-1.9558, abs=1e-4)
    assert out["fundamentals"]["ell_C"] == pytest.approx(0.5672, abs=1e-4)


def test_invariants_second_order(vdb_file, capsys):
    assert run(["invariants", vdb_file, "--at", "0.5,1.0", "--order", "2",
                "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    sec = out["second_order"]
    assert sec["K_Xi"] == pytest.approx(
        -0.25 * out["fundamentals"]["C_chi"], rel=1e-8)


def test_json_reports_roundtrip(vdb_file, capsys):
    assert run(["invariants", vdb_file, "--at", "0.7,1.2", "--json"]) == 0
    text = capsys.readouterr().out
    reparsed = json.loads(text)
    assert dumps(reparsed) + "\n" == text


def test_grid_csv(vdb_file, tmp_path):
    out = tmp_path / "grid.csv"
    assert run(["grid", vdb_file, "--t1", "0.4:1.0:3", "--t2",
                "0.8:1.4:2", "--csv", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header[:3] == ["t1", "t2", "C_rho"]
    assert len(lines) == 7
    assert "nan" not in lines[1]


def test_grid_csv_nan_for_unavailable(tmp_path):
    flat = tmp_path / "flat.json"
    assert run(["catalog", "flat", "--emit", str(flat)]) == 0
    out = tmp_path / "grid.csv"
    assert run(["grid", str(flat), "--t1", "0:1:2", "--t2", "0:1:2",
                "--order", "2", "--csv", "--out", str(out)]) == 0
    assert "nan" in out.read_text()  # J1, J2 undefined when C_rho = 0


def test_check_einstein_pass_and_fail(vdb_file, kundu_file):
    assert run(["check-einstein", kundu_file, "--lambda", "3",
                "--points", "grid"]) == 0
    # the published vdb display is not Ricci-flat
    assert run(["check-einstein", vdb_file, "--lambda", "0",
                "--points", "grid"]) == 1


def test_check_relations_first(vdb_file):
    assert run(["check-relations", vdb_file, "--first", "--tol",
                "1e-8"]) == 0


def test_check_relations_onshell(kundu_file):
    assert run(["check-relations", kundu_file, "--onshell",
                "--lambda", "3"]) == 0


def test_rank_subcommand(capsys):
    assert run(["rank", "--random", "3", "--set", "fundamental6",
                "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rank"] == 6
    assert run(["rank", "--random", "5", "--set", "order2_20"]) == 0
    assert run(["rank", "--random", "2", "--set",
                "fundamental6_transitive"]) == 0


def test_transform_invariance(vdb_file, tmp_path):
    tr = tmp_path / "tr.json"
    tr.write_text(json.dumps({
        "phi1": "t1 + 0.1*t2^2", "phi2": "t2",
        "psi1": "sin(t1)", "psi2": "0",
        "alpha": [[2, 1], [0, 1]]}))
    assert run(["transform", vdb_file, str(tr), "--report-invariance",
                "--points", "0.5,1.0;0.8,1.2"]) == 0


def test_equiv_consistent(vdb_file, tmp_path, capsys):
    m = catalog("vdb")
    p = make_transform("0.9*t1 + 0.1*t2", "1.1*t2 - 0.1*t1 - 0.1",
                       "0.4*t1", "0.2*t2", [[1.0, 1.0], [0.0, 1.0]])
    mt = apply_to_metric(m, p, name="vdb_transformed")
    other = tmp_path / "vdbt.json"
    other.write_text(json.dumps(mt.to_document()))
    (d1, d2) = mt.domain
    rect = f"{d1[0]}:{d1[1]},{d2[0]}:{d2[1]}"
    code = run(["equiv", vdb_file, str(other), "--rect-b", rect, "--json"])
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "Consistent", out
    assert code == 0


def test_equiv_not_consistent(vdb_file, kundu_file, capsys):
    code = run(["equiv", vdb_file, kundu_file, "--json"])
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "Inconsistent"
    assert code == 1


def test_usage_error_exit_code():
    assert run(["invariants"]) == 2
    assert run(["no-such-command"]) == 2
    assert run(["invariants", "/nonexistent.json", "--at", "0,0"]) == 2


def test_float_formatting_17_digits():
    x = 1.0 / 3.0
    text = dumps({"x": x})
    assert format(x, ".17g") in text
    assert json.loads(text)["x"] == x
