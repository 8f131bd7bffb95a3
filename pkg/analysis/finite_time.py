# analysis/finite_time.py
"""
Finite-horizon ruin probabilities psi^(j)(u, T) for periodic claim sequences.

Season j's horizon-T value is built from season j+1's horizon-(T-1) values:

    psi_j(u, T) = P(Z_j > u) + sum_{k=0..u} P(Z_j = k) psi_{j+1}(u + 1 - k, T - 1)

with j + 1 taken modulo the period.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from analysis.pmf_core import Pmf, SeasonalModel, seasonal_model, tail
from analysis.scalars import EXACT, Scalar
from utils.errors import InvalidParameter, InvalidSeasonIndex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuinMatrix:
    """psi[u][T - 1] for u = 0..u_max, T = 1..t_max."""

    psi: Tuple[Tuple[Scalar, ...], ...]
    start_season: int = 0

    @property
    def u_max(self) -> int:
        return len(self.psi) - 1

    @property
    def t_max(self) -> int:
        return len(self.psi[0]) if self.psi else 0

    def at(self, u: int, horizon: int) -> Scalar:
        return self.psi[u][horizon - 1]

    def row(self, horizon: int) -> List[Scalar]:
        """Values over u for one horizon."""
        return [self.psi[u][horizon - 1] for u in range(self.u_max + 1)]

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.psi], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        """Rows are horizons T, columns initial surpluses u (the printed table layout)."""
        frame = pd.DataFrame(self.as_array().T, columns=list(range(self.u_max + 1)))
        frame.index = list(range(1, self.t_max + 1))
        frame.index.name = "T"
        return frame


def one_step_ruin(season: Pmf, u: int) -> Scalar:
    """Probability that the first claim alone ruins surplus u."""
    if u < 0:
        raise InvalidParameter(f"Initial surplus must be non-negative, got {u}")
    return tail(season, u)


# --------- dynamic programming ----------

def _tails(season: Pmf, width: int) -> List[Scalar]:
    return [tail(season, u) for u in range(width)]


def _shifted_sum(masses: Sequence[Scalar], shifted: Sequence[Scalar], width: int, exact: bool) -> List[Scalar]:
    """out[u] = sum_{k=0..u} masses[k] * shifted[u - k] for u < width."""
    if not exact:
        full = np.convolve(np.asarray(masses, dtype=float), np.asarray(shifted, dtype=float))
        return list(full[:width])
    out: List[Scalar] = [Fraction(0)] * width
    for k, m in enumerate(masses[:width]):
        if m == 0:
            continue
        for u in range(k, width):
            out[u] += m * shifted[u - k]
    return out


def _horizon_step(model: SeasonalModel, previous: List[List[Scalar]], width: int, exact: bool) -> List[List[Scalar]]:
    current = []
    for j, season in enumerate(model.seasons):
        following = previous[(j + 1) % model.period]
        # following[v] for v = 1..width
        shifted = following[1:width + 1]
        spread = _shifted_sum(season.masses, shifted, width, exact)
        tails = _tails(season, width)
        current.append([tails[u] + spread[u] for u in range(width)])
    return current


def _all_seasons(model: SeasonalModel, u_max: int, t_max: int) -> List[List[List[Scalar]]]:
    """
    table[j][u][T-1] for every season. Horizon T needs surpluses up to
    u_max + t_max - T, so the working set shrinks as T grows.
    """
    if u_max < 0:
        raise InvalidParameter(f"u_max must be >= 0, got {u_max}")
    if t_max < 1:
        raise InvalidParameter(f"t_max must be >= 1, got {t_max}")

    exact = model.mode == EXACT
    width = u_max + t_max
    layer = [_tails(season, width) for season in model.seasons]
    table = [[[layer[j][u]] for u in range(u_max + 1)] for j in range(model.period)]

    for horizon in range(2, t_max + 1):
        width = u_max + t_max - horizon + 1
        layer = _horizon_step(model, layer, width, exact)
        for j in range(model.period):
            for u in range(u_max + 1):
                table[j][u].append(layer[j][u])
    return table


def finite_time_ruin(model: SeasonalModel, u_max: int, t_max: int, start_season: int = 0) -> RuinMatrix:
    """psi^(start_season)(u, T) for u = 0..u_max, T = 1..t_max."""
    if not 0 <= start_season < model.period:
        raise InvalidSeasonIndex(f"start_season must lie in 0..{model.period - 1}, got {start_season}")
    table = _all_seasons(model, u_max, t_max)
    return _as_matrix(table[start_season], start_season)


def finite_time_ruin_all(model: SeasonalModel, u_max: int, t_max: int) -> Tuple[RuinMatrix, ...]:
    """One RuinMatrix per starting season, from a single pass."""
    table = _all_seasons(model, u_max, t_max)
    return tuple(_as_matrix(rows, j) for j, rows in enumerate(table))


def _as_matrix(rows: List[List[Scalar]], start_season: int) -> RuinMatrix:
    return RuinMatrix(psi=tuple(tuple(_clean(v) for v in row) for row in rows), start_season=start_season)


def _clean(value: Scalar) -> Scalar:
    if isinstance(value, Fraction):
        return value
    return min(1.0, max(0.0, float(value)))


# --------- homogeneous cross-check ----------

def homogeneous_finite_time(claim: Pmf, u_max: int, t_max: int) -> RuinMatrix:
    """
    Single-season recursion psi(u, T) = psi(u, 1) + sum_k psi(u + 1 - k, T - 1) z_k,
    written out directly (no shared code with the periodic DP).
    """
    if u_max < 0 or t_max < 1:
        raise InvalidParameter("u_max must be >= 0 and t_max >= 1")
    width = u_max + t_max
    first = [tail(claim, u) for u in range(width)]
    prev = list(first)
    columns = [first[: u_max + 1]]
    for horizon in range(2, t_max + 1):
        reach = u_max + t_max - horizon + 1
        cur = []
        for u in range(reach):
            total = first[u]
            for k in range(min(u, claim.max_support) + 1):
                total += prev[u + 1 - k] * claim.masses[k]
            cur.append(total)
        columns.append(cur[: u_max + 1])
        prev = cur
    rows = [[columns[t][u] for t in range(t_max)] for u in range(u_max + 1)]
    return _as_matrix(rows, 0)


def identical_seasons(claim: Pmf, period: int = 3) -> SeasonalModel:
    return seasonal_model([claim] * period)
