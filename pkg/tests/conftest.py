# tests/conftest.py

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np
import pytest

from analysis.net_profit import classify_net_profit
from analysis.pmf_core import SeasonalModel, pmf_from_weights, seasonal_model
from analysis.scalars import EXACT, FLOAT
from services.golden_tables_service import EXAMPLE_MODELS
from utils.model_validation import model_from_dict

# (season, atom) pairs that must vanish / must not vanish for each zero-pattern case
BRANCH_PATTERNS: Dict[int, Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]] = {
    1: ([], [(0, 0), (1, 0), (2, 0)]),
    2: ([(0, 0)], [(0, 1), (1, 0), (2, 0)]),
    3: ([(1, 0)], [(1, 1), (0, 0), (2, 0)]),
    4: ([(2, 0)], [(2, 1), (0, 0), (1, 0)]),
    5: ([(0, 0), (1, 0)], [(2, 0)]),
    6: ([(0, 0), (2, 0)], [(1, 0)]),
    7: ([(1, 0), (2, 0)], [(0, 0)]),
    8: ([(0, 0), (0, 1)], [(1, 0), (2, 0)]),
    9: ([(1, 0), (1, 1)], [(0, 0), (2, 0)]),
    10: ([(2, 0), (2, 1)], [(0, 0), (1, 0)]),
}


def example_model(name: str, mode: str = FLOAT) -> SeasonalModel:
    return model_from_dict(EXAMPLE_MODELS[name], mode)


@pytest.fixture
def first_model() -> SeasonalModel:
    return example_model("first")


@pytest.fixture
def first_model_exact() -> SeasonalModel:
    return example_model("first", EXACT)


@pytest.fixture
def poisson_model() -> SeasonalModel:
    return example_model("poisson")


@pytest.fixture
def geometric_model() -> SeasonalModel:
    return example_model("geometric")


@pytest.fixture
def zero_claims_model() -> SeasonalModel:
    return seasonal_model([pmf_from_weights([1]) for _ in range(3)])


def random_weights(rng: np.random.Generator, zeros: List[int], width: int) -> List[int]:
    """Positive integer weights over 0..width-1, with the listed atoms set to zero."""
    weights = [int(w) for w in rng.integers(1, 6, size=width)]
    # weight on 0 keeps most draws subcritical
    weights[0] += int(rng.integers(4, 16))
    for k in zeros:
        weights[k] = 0
    return weights


def random_model(rng: np.random.Generator, mode: str = EXACT, max_support: int = 3, subcritical: bool = False) -> SeasonalModel:
    """Three seasons on {0..max_support}, random integer weights, possibly with zero atoms."""
    for _ in range(1000):
        seasons = []
        for _ in range(3):
            width = int(rng.integers(1, max_support + 2))
            weights = [int(w) for w in rng.integers(0, 6, size=width)]
            if sum(weights) == 0:
                weights[0] = 1
            seasons.append(pmf_from_weights(weights, mode))
        model = seasonal_model(seasons)
        if not subcritical or classify_net_profit(model).subcritical:
            return model
    raise RuntimeError("no subcritical draw")


def branch_model(rng: np.random.Generator, branch: int, mode: str = FLOAT, max_width: int = 4) -> SeasonalModel:
    """Subcritical three-season model whose zero pattern selects ``branch``."""
    zeros, _ = BRANCH_PATTERNS[branch]
    for _ in range(5000):
        seasons = []
        for season in range(3):
            forced = [k for s, k in zeros if s == season]
            low = max(forced, default=-1) + 2
            width = int(rng.integers(max(low, 2), max(low, max_width) + 1))
            seasons.append(pmf_from_weights(random_weights(rng, forced, width), mode))
        model = seasonal_model(seasons)
        if classify_net_profit(model).subcritical:
            return model
    raise RuntimeError(f"no subcritical draw for branch {branch}")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)
