# tests/test_cli.py

import json
from pathlib import Path

import pytest

from app import main
from utils.table_render import parse_csv, pretty_cells

MODELS = Path(__file__).resolve().parent.parent / "models"
FIRST = str(MODELS / "first.json")


@pytest.fixture
def zero_model_file(tmp_path):
    path = tmp_path / "zero.json"
    path.write_text(json.dumps({"seasons": [{"weights": [1]}] * 3}), encoding="utf-8")
    return str(path)


def test_classify(capsys):
    assert main(["classify", "--model", FIRST]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["Subcritical, E S=2.7, branch 1 (s₀≠0)", "leading aggregate atom: s_0"]


def test_classify_json(capsys):
    assert main(["classify", "--model", FIRST, "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["class"] == "Subcritical"
    assert report["branch"] == 1
    assert report["leading_atom"] == 0


def test_compute_single_cell(capsys, zero_model_file):
    assert main(["compute", "--model", zero_model_file, "--u-max", "0", "--t-max", "1", "--format", "csv"]) == 0
    rows = parse_csv(capsys.readouterr().out)
    assert [label for label, _ in rows] == ["1", "inf"]
    assert float(rows[0][1][0]) == 0
    assert float(rows[1][1][0]) == pytest.approx(0, abs=1e-12)

    assert main(["compute", "--model", zero_model_file, "--u-max", "0", "--t-max", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-2].split() == ["1", "0.000"]
    assert lines[-1].split() == ["inf", "0.000"]


def test_compute_writes_output_file(tmp_path, capsys):
    target = tmp_path / "out" / "table.json"
    assert main(["compute", "--model", FIRST, "--u-max", "2", "--t-max", "2", "--format", "json", "--output", str(target)]) == 0
    assert capsys.readouterr().out == ""
    payload = json.loads(target.read_text(encoding="utf-8"))
    assert list(payload["rows"]) == ["1", "2", "inf"]


def test_exact_mode_matches_float_after_rounding(capsys):
    args = ["compute", "--model", FIRST, "--u-max", "3", "--t-max", "3", "--format", "csv"]
    assert main(args) == 0
    floats = parse_csv(capsys.readouterr().out)
    assert main(args + ["--mode", "exact"]) == 0
    exact = parse_csv(capsys.readouterr().out)
    assert pretty_cells(exact) == pretty_cells(floats)


def test_fixed_boundary_and_printed_flags(capsys):
    args = ["compute", "--model", FIRST, "--u-max", "1", "--t-max", "1", "--format", "json",
            "--boundary-index", "300", "--printed-formulas"]
    assert main(args) == 0
    meta = json.loads(capsys.readouterr().out)["metadata"]
    assert meta["solver"]["boundary_index"] == 300


def test_bad_boundary_index_is_rejected():
    with pytest.raises(SystemExit):
        main(["compute", "--model", FIRST, "--boundary-index", "soon"])


def test_bad_model_file_exits_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("not json", encoding="utf-8")
    assert main(["compute", "--model", str(path)]) == 2
    assert main(["classify", "--model", str(tmp_path / "missing.json")]) == 2


def test_wrong_period_exits_3(tmp_path):
    path = tmp_path / "two.json"
    path.write_text(json.dumps({"seasons": [{"weights": [1, 1]}] * 2}), encoding="utf-8")
    assert main(["classify", "--model", str(path)]) == 3


def test_mc_check_single_path(capsys):
    assert main(["mc-check", "--model", FIRST, "--n-paths", "1", "--seed", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("seed=3 n_paths=1 ")
    assert len(lines) == 1 + 25


def test_arbitrate_unflagged(capsys):
    assert main(["arbitrate", "--model", FIRST, "--u-max", "2", "--n-paths", "2000"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("branch 1 (s₀≠0): generic solver supports both")


@pytest.mark.slow
def test_tables_with_corrupted_golden_exit_7(tmp_path, capsys):
    golden = tmp_path / "golden.json"
    golden.write_text(json.dumps({"first": {"inf": ["0.900"] + ["0"] * 11}}), encoding="utf-8")
    assert main(["tables", "--golden", str(golden), "--output", str(tmp_path / "out")]) == 7
    assert (tmp_path / "out" / "table_first.csv").exists()


def test_unreadable_golden_exits_2(tmp_path):
    golden = tmp_path / "golden.json"
    golden.write_text("{", encoding="utf-8")
    assert main(["tables", "--golden", str(golden), "--output", str(tmp_path / "out")]) == 2
