# tests/test_model_validation.py

import json
from fractions import Fraction
from pathlib import Path

import pytest

from analysis.scalars import EXACT
from utils.errors import EmptyWeights, ParseError
from utils.model_validation import (
    load_model,
    model_from_dict,
    validate_model_dict,
    validate_model_file,
)

MODELS = Path(__file__).resolve().parent.parent / "models"


def write_json(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def test_missing_file(tmp_path):
    assert validate_model_file(str(tmp_path / "none.json")) == (False, "File does not exist")


def test_empty_file(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("", encoding="utf-8")
    assert validate_model_file(str(path)) == (False, "File is empty")


def test_oversized_file(tmp_path):
    path = tmp_path / "big.json"
    path.write_text(" " * (1024 * 1024 + 1), encoding="utf-8")
    is_valid, error = validate_model_file(str(path))
    assert not is_valid
    assert "too large" in error


@pytest.mark.parametrize(
    "raw, fragment",
    [
        ([], "JSON object"),
        ({}, "non-empty list"),
        ({"seasons": []}, "non-empty list"),
        ({"seasons": [3]}, "must be an object"),
        ({"seasons": [{}]}, "exactly one of"),
        ({"seasons": [{"weights": [1], "poisson": 1}]}, "exactly one of"),
        ({"seasons": [{"weights": "1,2"}]}, "must be a list"),
        ({"seasons": [{"weights": [1]}], "mode": "decimal"}, "Unknown mode"),
        ({"seasons": [{"weights": [1]}], "name": 5}, "'name'"),
    ],
)
def test_structural_errors(raw, fragment):
    is_valid, error = validate_model_dict(raw)
    assert not is_valid
    assert fragment in error


def test_model_from_dict_modes():
    raw = {"mode": "exact", "seasons": [{"weights": ["0.5", "0.5"]}] * 3}
    model = model_from_dict(raw)
    assert model.mode == EXACT
    assert model.seasons[0].masses == (Fraction(1, 2), Fraction(1, 2))
    assert model_from_dict(raw, "float").mode == "float"


def test_parametric_seasons():
    model = model_from_dict({"tail_eps": 1e-9, "seasons": [{"poisson": "1/2"}, {"geometric": 0.75}, {"weights": [1]}]})
    assert model.seasons[0].tail_deficit <= 1e-9
    assert model.seasons[1].masses[0] == pytest.approx(0.75)
    assert not model.is_finite


def test_parametric_seasons_refuse_exact_mode():
    with pytest.raises(ParseError):
        model_from_dict({"mode": "exact", "seasons": [{"poisson": 1}]})


def test_bad_weights_keep_their_error():
    with pytest.raises(EmptyWeights):
        model_from_dict({"seasons": [{"weights": []}]})


def test_load_model(tmp_path):
    path = write_json(tmp_path / "m.json", {"name": "demo", "seasons": [{"weights": [2, 1, 1]}] * 3})
    model = load_model(path)
    assert model.name == "demo"
    assert model.period == 3
    assert model.mean_s == pytest.approx(2.25)


def test_load_shipped_models():
    for name in ("first", "poisson", "geometric"):
        assert load_model(str(MODELS / f"{name}.json")).period == 3


def test_load_model_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{seasons: [", encoding="utf-8")
    with pytest.raises(ParseError):
        load_model(str(path))


def test_load_model_rejects_binary(tmp_path):
    path = tmp_path / "bin.json"
    path.write_bytes(b"\xff\xfe\x00\x81")
    with pytest.raises(ParseError):
        load_model(str(path))


def test_load_model_missing(tmp_path):
    with pytest.raises(ParseError) as caught:
        load_model(str(tmp_path / "gone.json"))
    assert caught.value.exit_code == 2
