# services/arbitration_service.py
"""
Printed-versus-derived branch formulas, settled by the generic solver and a
long-horizon Monte Carlo proxy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

from analysis.linear_forms import SolveOptions
from analysis.pmf_core import SeasonalModel
from analysis.ultimate import BRANCH_NAMES, PRINTED_DIFFERS, branch_id, ultimate_branch, ultimate_generic
from services.monte_carlo_service import DEFAULT_HORIZON, McEstimate, mc_ultimate_proxy
from utils.errors import RuinError

logger = logging.getLogger(__name__)

# Agreement threshold between two solvers
SOLVER_TOLERANCE = 1e-6

# Allowance for the proxy stopping at a finite horizon
MC_BIAS_ALLOWANCE = 0.005

MC_Z_LIMIT = 4.0


@dataclass(frozen=True)
class CellVerdict:
    u: int
    printed: Optional[float]
    derived: float
    generic: float
    mc: Optional[McEstimate] = None

    @property
    def printed_agrees(self) -> Optional[bool]:
        if self.printed is None:
            return None
        return abs(self.printed - self.generic) <= SOLVER_TOLERANCE

    @property
    def derived_agrees(self) -> bool:
        return abs(self.derived - self.generic) <= SOLVER_TOLERANCE

    def mc_supports(self, value: Optional[float]) -> Optional[bool]:
        """Proxy sits below psi(u); accept values within 4 standard errors plus the bias allowance."""
        if self.mc is None or value is None:
            return None
        gap = value - self.mc.p_hat
        return -MC_Z_LIMIT * self.mc.std_err <= gap <= MC_Z_LIMIT * self.mc.std_err + MC_BIAS_ALLOWANCE

    def as_dict(self) -> Dict[str, object]:
        return {
            "u": self.u,
            "printed": self.printed,
            "derived": self.derived,
            "generic": self.generic,
            "mc": None if self.mc is None else self.mc.p_hat,
            "mc_std_err": None if self.mc is None else self.mc.std_err,
            "printed_agrees": self.printed_agrees,
            "derived_agrees": self.derived_agrees,
            "mc_supports_printed": self.mc_supports(self.printed),
            "mc_supports_generic": self.mc_supports(self.generic),
        }


@dataclass(frozen=True)
class ArbitrationReport:
    branch: int
    flagged: bool
    printed_error: Optional[str]
    cells: List[CellVerdict] = field(default_factory=list)

    @property
    def supported(self) -> str:
        """Which formula the generic solver backs: "printed", "derived" or "both"."""
        derived_ok = all(c.derived_agrees for c in self.cells)
        printed_ok = self.printed_error is None and all(c.printed_agrees for c in self.cells)
        if printed_ok and derived_ok:
            return "both"
        if derived_ok:
            return "derived"
        if printed_ok:
            return "printed"
        return "neither"

    @property
    def consistent(self) -> bool:
        """Generic and derived solvers agree and the simulation does not reject them."""
        return all(c.derived_agrees and c.mc_supports(c.generic) is not False for c in self.cells)

    def as_dict(self) -> Dict[str, object]:
        return {
            "branch": self.branch,
            "branch_name": BRANCH_NAMES[self.branch],
            "printed_formula_differs": self.flagged,
            "printed_error": self.printed_error,
            "supported": self.supported,
            "consistent": self.consistent,
            "cells": [c.as_dict() for c in self.cells],
        }

    def describe(self) -> str:
        lines = [f"branch {self.branch} ({BRANCH_NAMES[self.branch]}): generic solver supports {self.supported}"]
        if self.printed_error:
            lines.append(f"  printed formula failed: {self.printed_error}")
        for c in self.cells:
            printed = "n/a" if c.printed is None else f"{c.printed:.6f}"
            mc = "n/a" if c.mc is None else f"{c.mc.p_hat:.6f} ± {c.mc.std_err:.6f}"
            lines.append(
                f"  u={c.u}: printed {printed}, derived {c.derived:.6f}, generic {c.generic:.6f}, MC {mc}"
            )
        return "\n".join(lines)


def arbitrate(
    model: SeasonalModel,
    u_values: Sequence[int] = (0, 1, 2, 5),
    opts: Optional[SolveOptions] = None,
    mc_paths: int = 20000,
    seed: int = 42,
    mc_horizon: int = DEFAULT_HORIZON,
    workers: Optional[int] = None,
) -> ArbitrationReport:
    """
    Compare the branch solver with and without its printed formulas against
    the generic solver, and check each against a Monte Carlo proxy of psi(u).
    """
    u_max = max(u_values)
    opts = replace(opts or SolveOptions.from_config(), u_max=u_max)
    branch = branch_id(model)

    derived = ultimate_branch(model, replace(opts, printed_formulas=False))
    generic = ultimate_generic(model, opts)

    printed_psi: Optional[List[float]] = None
    printed_error: Optional[str] = None
    try:
        printed_psi = [float(v) for v in ultimate_branch(model, replace(opts, printed_formulas=True)).psi]
    except RuinError as exc:
        printed_error = str(exc)
        logger.warning("Printed formula for branch %d failed: %s", branch, exc)

    cells = []
    for u in u_values:
        mc = mc_ultimate_proxy(model, u, mc_paths, seed, horizon=mc_horizon, workers=workers) if mc_paths > 0 else None
        cell = CellVerdict(
            u=u,
            printed=None if printed_psi is None else printed_psi[u],
            derived=float(derived.psi[u]),
            generic=float(generic.psi[u]),
            mc=mc,
        )
        if cell.printed_agrees is False:
            logger.warning(
                "Branch %d printed formula gives psi(%d)=%.9g, generic solver %.9g",
                branch, u, cell.printed, cell.generic,
            )
        cells.append(cell)

    return ArbitrationReport(
        branch=branch,
        flagged=branch in PRINTED_DIFFERS,
        printed_error=printed_error,
        cells=cells,
    )
