# analysis/pipeline.py

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

from analysis.finite_time import RuinMatrix, finite_time_ruin
from analysis.linear_forms import SolveOptions, SurvivalVector
from analysis.net_profit import NetProfitClass, classify_net_profit
from analysis.pmf_core import SeasonalModel
from analysis.scalars import Scalar
from analysis.ultimate import homogeneous_ultimate, ultimate_ruin_profile
from utils.errors import InvalidParameter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuinTable:
    """
    Finite rows T = 1..t_max and, when available, the ultimate row
    (labelled "inf") over u = 0..u_max.
    """

    name: Optional[str]
    finite: RuinMatrix
    ultimate: Optional[List[Scalar]]
    classification: Optional[NetProfitClass] = None
    survival: Optional[SurvivalVector] = None
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def u_max(self) -> int:
        return self.finite.u_max

    def labelled_rows(self) -> List[tuple]:
        """(label, values) pairs in print order."""
        rows = [(str(t), self.finite.row(t)) for t in range(1, self.finite.t_max + 1)]
        if self.ultimate is not None:
            rows.append(("inf", list(self.ultimate)))
        return rows

    def row_map(self) -> Dict[str, List[Scalar]]:
        return dict(self.labelled_rows())

    def metadata(self) -> Dict[str, Any]:
        meta: Dict[str, Any] = {"name": self.name, **self.summary}
        if self.classification is not None:
            meta["classification"] = self.classification.kind.value
        if self.survival is not None:
            meta["solver"] = self.survival.metadata()
        return meta


def _ultimate_row(model: SeasonalModel, u_max: int, opts: SolveOptions):
    if model.period == 3:
        verdict = classify_net_profit(model)
        psi, survival = ultimate_ruin_profile(model, u_max, opts)
        return psi, verdict, survival
    if model.period == 1:
        survival = homogeneous_ultimate(model.seasons[0], u_max)
        return list(survival.psi), None, survival
    logger.warning("No ultimate solver for period %d; the inf row is left out", model.period)
    return None, None, None


def compute_ruin_table(
    model: SeasonalModel,
    u_max: int,
    t_max: int,
    opts: Optional[SolveOptions] = None,
    start_season: int = 0,
    with_ultimate: bool = True,
) -> RuinTable:
    """
    Run the finite-horizon programme and the ultimate solver for one model:
      - psi(u, T) for u = 0..u_max, T = 1..t_max
      - psi(u) as the final row, for period-3 (or period-1) models
    """
    if u_max < 0 or t_max < 0:
        raise InvalidParameter(f"Need u_max >= 0 and t_max >= 0, got {u_max}, {t_max}")
    opts = opts or SolveOptions.from_config(u_max=u_max)
    if opts.u_max != u_max:
        opts = replace(opts, u_max=u_max)

    started = time.perf_counter()
    if t_max > 0:
        finite = finite_time_ruin(model, u_max, t_max, start_season)
    else:
        finite = RuinMatrix(psi=tuple(() for _ in range(u_max + 1)), start_season=start_season)
    finite_seconds = time.perf_counter() - started

    ultimate, verdict, survival = (None, None, None)
    if with_ultimate:
        ultimate, verdict, survival = _ultimate_row(model, u_max, opts)
    total_seconds = time.perf_counter() - started

    summary = {
        "period": model.period,
        "mode": model.mode,
        "mean_s": float(model.mean_s),
        "mean_deficit_bound": float(model.mean_deficit_bound),
        "u_max": u_max,
        "t_max": t_max,
        "start_season": start_season,
        "finite_seconds": round(finite_seconds, 4),
        "total_seconds": round(total_seconds, 4),
    }
    if model.period == 3:
        summary["leading_atom"] = model.leading_atom()

    return RuinTable(
        name=model.name,
        finite=finite,
        ultimate=ultimate,
        classification=verdict,
        survival=survival,
        summary=summary,
    )
