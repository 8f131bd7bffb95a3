# analysis/net_profit.py
"""
Net profit classification for three-season models.

E S > 3, or E S = 3 with any spread, means ruin is certain. E S = 3 with three
point masses gives one of ten explicit ruin profiles; E S < 3 is the only
case that needs the ultimate solvers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from analysis.pmf_core import SeasonalModel
from analysis.scalars import EXACT
from utils.errors import InvalidParameter, NotSubcritical, WrongPeriod

logger = logging.getLogger(__name__)

# |E S - 3| below this counts as E S = 3 in float mode
CRITICAL_TOLERANCE = 1e-12


class NetProfitKind(str, Enum):
    SUPERCRITICAL = "Supercritical"
    CRITICAL_DEGENERATE = "CriticalDegenerate"
    CRITICAL_DIFFUSE = "CriticalDiffuse"
    SUBCRITICAL = "Subcritical"


# Point-mass locations (a, b, c) -> number of initial surpluses u = 0, 1, ... that are ruined
DEGENERATE_PATTERNS: Dict[Tuple[int, int, int], int] = {
    (3, 0, 0): 3,
    (0, 3, 0): 2,
    (2, 1, 0): 2,
    (1, 2, 0): 2,
    (2, 0, 1): 2,
    (0, 0, 3): 1,
    (0, 2, 1): 1,
    (0, 1, 2): 1,
    (1, 0, 2): 1,
    (1, 1, 1): 1,
}


def critical_profile(pattern: Tuple[int, int, int], u_max: int) -> List[int]:
    """psi(u) for u = 0..u_max when the seasons are point masses at ``pattern``."""
    if pattern not in DEGENERATE_PATTERNS:
        raise InvalidParameter(f"{pattern} is not a point-mass pattern with E S = 3")
    ruined = DEGENERATE_PATTERNS[pattern]
    return [1 if u < ruined else 0 for u in range(u_max + 1)]


def first_cycle_ruin_depth(pattern: Tuple[int, int, int]) -> int:
    """
    Deepest shortfall over one cycle: max_n (z_1 + ... + z_n - n).
    Surplus u is ruined iff u <= this value; the cycle then repeats unchanged.
    """
    depth, running = -1, 0
    for n, claim in enumerate(pattern, start=1):
        running += claim
        depth = max(depth, running - n)
    return depth


@dataclass(frozen=True)
class NetProfitClass:
    kind: NetProfitKind
    mean_s: float
    pattern: Optional[Tuple[int, int, int]] = None

    @property
    def subcritical(self) -> bool:
        return self.kind is NetProfitKind.SUBCRITICAL

    def psi_profile(self, u_max: int) -> List[int]:
        """Ruin profile for the classes that do not need a solver."""
        if self.kind is NetProfitKind.SUBCRITICAL:
            raise NotSubcritical("Subcritical models need the ultimate solvers")
        if self.kind is NetProfitKind.CRITICAL_DEGENERATE:
            return critical_profile(self.pattern, u_max)
        return [1] * (u_max + 1)

    def describe(self) -> str:
        if self.kind is NetProfitKind.CRITICAL_DEGENERATE:
            ruined = DEGENERATE_PATTERNS[self.pattern]
            shown = ",".join(["1"] * ruined + ["0", "0"])
            return f"{self.kind.value}, ψ=({shown},…)"
        if self.kind is NetProfitKind.SUBCRITICAL:
            return f"{self.kind.value}, E S={_format_mean(self.mean_s)}"
        return f"{self.kind.value}, ψ≡1"


def _format_mean(value: float) -> str:
    return f"{value:.6g}"


def classify_net_profit(model: SeasonalModel) -> NetProfitClass:
    if model.period != 3:
        raise WrongPeriod(f"Net profit classification needs 3 seasons, got {model.period}")

    excess = model.mean_s - 3
    if model.mode == EXACT:
        critical = excess == 0
    else:
        critical = abs(excess) <= CRITICAL_TOLERANCE
    mean_s = float(model.mean_s)

    if critical:
        locations = tuple(season.point_mass_location() for season in model.seasons)
        if all(loc is not None for loc in locations) and sum(locations) == 3:
            logger.debug("Degenerate critical pattern %s", locations)
            return NetProfitClass(NetProfitKind.CRITICAL_DEGENERATE, mean_s, locations)
        return NetProfitClass(NetProfitKind.CRITICAL_DIFFUSE, mean_s)
    if excess > 0:
        return NetProfitClass(NetProfitKind.SUPERCRITICAL, mean_s)
    return NetProfitClass(NetProfitKind.SUBCRITICAL, mean_s)


def require_subcritical(model: SeasonalModel) -> NetProfitClass:
    verdict = classify_net_profit(model)
    if not verdict.subcritical:
        raise NotSubcritical(f"Model is {verdict.kind.value} (E S = {_format_mean(verdict.mean_s)}); ruin is not a solver question")
    return verdict
