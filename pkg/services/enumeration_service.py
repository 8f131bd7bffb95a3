# services/enumeration_service.py
"""
Exact finite-horizon ruin by walking every claim sequence.

Used as an oracle for the dynamic programme: no recursion is shared, only
the definition "ruined if u + n - (z_1 + ... + z_n) <= 0 for some n <= T".
"""

from __future__ import annotations

import logging
from typing import List

from analysis.pmf_core import SeasonalModel
from analysis.scalars import Scalar
from utils.errors import InfiniteSupport, InvalidParameter, RefuseTooLarge

logger = logging.getLogger(__name__)

MAX_PATHS = 10 ** 8


def _check_enumerable(model: SeasonalModel, horizon: int) -> None:
    if not model.is_finite:
        raise InfiniteSupport("Enumeration needs finite-support seasons (tail_deficit = 0)")
    widest = max(season.max_support for season in model.seasons) + 1
    if widest ** horizon > MAX_PATHS:
        raise RefuseTooLarge(f"{widest}^{horizon} claim sequences exceed the {MAX_PATHS:.0e} limit")


def ruin_time_distribution(model: SeasonalModel, u: int, horizon: int, start_season: int = 0) -> List[Scalar]:
    """
    out[n] = P(ruin happens exactly at step n) for n = 1..horizon (out[0] = 0).
    A branch stops as soon as it is ruined and contributes its path probability.
    """
    if u < 0 or horizon < 1:
        raise InvalidParameter("Enumeration needs u >= 0 and T >= 1")
    _check_enumerable(model, horizon)

    zero = model.aggregate.masses[0] * 0
    out: List[Scalar] = [zero] * (horizon + 1)
    supports = [
        [(k, m) for k, m in enumerate(season.masses) if m != 0]
        for season in model.seasons
    ]
    period = model.period

    # (step about to be drawn, surplus before it, probability of the prefix)
    stack = [(1, u, None)]
    while stack:
        step, surplus, weight = stack.pop()
        for claim, mass in supports[(start_season + step - 1) % period]:
            prob = mass if weight is None else weight * mass
            after = surplus + 1 - claim
            if after <= 0:
                out[step] += prob
            elif step < horizon:
                stack.append((step + 1, after, prob))
    return out


def enumerate_finite_time(model: SeasonalModel, u: int, horizon: int, start_season: int = 0) -> Scalar:
    """psi(u, T) as the total probability of ruined claim sequences."""
    return sum(ruin_time_distribution(model, u, horizon, start_season)[1:], model.aggregate.masses[0] * 0)


def enumerate_all_horizons(model: SeasonalModel, u: int, horizon: int, start_season: int = 0) -> List[Scalar]:
    """psi(u, T) for T = 1..horizon from a single walk."""
    steps = ruin_time_distribution(model, u, horizon, start_season)
    running = steps[0]
    out = []
    for n in range(1, horizon + 1):
        running += steps[n]
        out.append(running)
    return out
