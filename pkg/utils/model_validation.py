# utils/model_validation.py
"""
Model file validation and parsing.

A model file is JSON:

    {"name": "...", "mode": "float" | "exact", "tail_eps": 1e-12,
     "seasons": [{"weights": ["0.5", "0.25", "0.25"]} | {"poisson": 0.5} | {"geometric": 0.75}, ...]}
"""

from __future__ import annotations

import json
import logging
import os
from typing import Any, Dict, Optional, Tuple

from analysis.pmf_core import Pmf, SeasonalModel, pmf_from_weights, pmf_geometric, pmf_poisson, seasonal_model
from analysis.scalars import EXACT, FLOAT, check_mode, parse_scalar
from utils.errors import ParseError

logger = logging.getLogger(__name__)

# Maximum model file size: 1 MB
MAX_FILE_SIZE_MB = 1
MAX_FILE_SIZE_BYTES = MAX_FILE_SIZE_MB * 1024 * 1024

SEASON_KINDS = ("weights", "poisson", "geometric")


def validate_model_file(file_path: str) -> Tuple[bool, Optional[str]]:
    """
    Validate that a model file can be read.
    Returns (is_valid, error_message)
    """
    if not os.path.exists(file_path):
        return False, "File does not exist"

    file_size = os.path.getsize(file_path)

    if file_size == 0:
        return False, "File is empty"

    if file_size > MAX_FILE_SIZE_BYTES:
        size_mb = file_size / (1024 * 1024)
        return False, f"File too large ({size_mb:.1f} MB). Maximum size is {MAX_FILE_SIZE_MB} MB"

    return True, None


def validate_model_dict(raw: Any) -> Tuple[bool, Optional[str]]:
    """
    Structural checks on a decoded model.
    Returns (is_valid, error_message)
    """
    if not isinstance(raw, dict):
        return False, "Model must be a JSON object"
    seasons = raw.get("seasons")
    if not isinstance(seasons, list) or not seasons:
        return False, "'seasons' must be a non-empty list"

    for i, season in enumerate(seasons):
        if not isinstance(season, dict):
            return False, f"Season {i} must be an object"
        kinds = [k for k in SEASON_KINDS if k in season]
        if len(kinds) != 1:
            return False, f"Season {i} needs exactly one of {', '.join(SEASON_KINDS)}"
        if kinds[0] == "weights" and not isinstance(season["weights"], list):
            return False, f"Season {i}: 'weights' must be a list"

    mode = raw.get("mode", FLOAT)
    if mode not in (FLOAT, EXACT):
        return False, f"Unknown mode '{mode}'"
    if "name" in raw and not isinstance(raw["name"], str):
        return False, "'name' must be a string"
    return True, None


def _build_season(index: int, season: Dict[str, Any], mode: str, tail_eps: Optional[float]) -> Pmf:
    if "weights" in season:
        return pmf_from_weights(season["weights"], mode)
    if mode == EXACT:
        raise ParseError(f"Season {index}: parametric families are irrational and cannot run in exact mode")
    if "poisson" in season:
        return pmf_poisson(parse_scalar(season["poisson"], FLOAT), tail_eps)
    return pmf_geometric(parse_scalar(season["geometric"], FLOAT), tail_eps)


def model_from_dict(raw: Any, mode_override: Optional[str] = None) -> SeasonalModel:
    """Build a SeasonalModel from a decoded model; ParseError on malformed content."""
    is_valid, error = validate_model_dict(raw)
    if not is_valid:
        raise ParseError(error)

    mode = check_mode(mode_override or raw.get("mode", FLOAT))
    tail_eps = raw.get("tail_eps")
    if tail_eps is not None:
        tail_eps = parse_scalar(tail_eps, FLOAT)

    seasons = [_build_season(i, s, mode, tail_eps) for i, s in enumerate(raw["seasons"])]
    model = seasonal_model(seasons, name=raw.get("name"))
    logger.debug("Loaded %d-season %s model, E S = %.6g", model.period, mode, float(model.mean_s))
    return model


def load_model(file_path: str, mode_override: Optional[str] = None) -> SeasonalModel:
    """Read and parse a model file."""
    is_valid, error = validate_model_file(file_path)
    if not is_valid:
        raise ParseError(f"{file_path}: {error}")

    try:
        with open(file_path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{file_path} is not valid JSON: {exc}")
    except UnicodeDecodeError:
        raise ParseError(f"{file_path} is not UTF-8 text")

    return model_from_dict(raw, mode_override)
