# commands/mc_check.py

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import List, Sequence

from analysis.finite_time import finite_time_ruin
from analysis.pmf_core import SeasonalModel
from commands.run_config import RunConfig, write_output
from services.monte_carlo_service import ALGORITHM, McEstimate, mc_finite_time_horizons
from utils.errors import OracleDisagreement

logger = logging.getLogger(__name__)

GRID_U = (0, 1, 2, 5, 10)
GRID_T = (1, 2, 5, 10, 20)

DEFAULT_PATHS = 10 ** 5
DEFAULT_SEED = 42
Z_LIMIT = 4.0


@dataclass(frozen=True)
class GridCell:
    u: int
    horizon: int
    expected: float
    estimate: McEstimate

    @property
    def z(self) -> float:
        return self.estimate.z_score(self.expected)

    @property
    def passed(self) -> bool:
        return abs(self.z) <= Z_LIMIT

    def describe(self) -> str:
        return (
            f"u={self.u:>3} T={self.horizon:>3}  psi={self.expected:.6f}  "
            f"mc={self.estimate.p_hat:.6f} ± {self.estimate.std_err:.6f}  z={self.z:+.2f}"
        )


def check_grid(
    model: SeasonalModel,
    n_paths: int,
    seed: int,
    grid_u: Sequence[int] = GRID_U,
    grid_t: Sequence[int] = GRID_T,
) -> List[GridCell]:
    """Simulated psi(u, T) against the dynamic programme on a (u, T) grid."""
    exact = finite_time_ruin(model, max(grid_u), max(grid_t))
    cells = []
    for u in grid_u:
        estimates = mc_finite_time_horizons(model, u, grid_t, n_paths, seed)
        for horizon, estimate in zip(grid_t, estimates):
            cells.append(GridCell(u, horizon, float(exact.at(u, horizon)), estimate))
    return cells


def run_mc_check(cfg: RunConfig) -> int:
    model = cfg.require_model()
    n_paths = cfg.paths_or(DEFAULT_PATHS)
    seed = cfg.seed_or(DEFAULT_SEED)
    cells = check_grid(model, n_paths, seed)
    failed = [c for c in cells if not c.passed]

    if cfg.output_format == "json":
        text = json.dumps(
            {
                "seed": seed,
                "n_paths": n_paths,
                "algorithm": ALGORITHM,
                "cells": [
                    {"u": c.u, "T": c.horizon, "psi": c.expected, "p_hat": c.estimate.p_hat,
                     "std_err": c.estimate.std_err, "z": c.z}
                    for c in cells
                ],
            },
            indent=2,
        ) + "\n"
    else:
        header = f"seed={seed} n_paths={n_paths} rng={ALGORITHM}"
        text = "\n".join([header] + [c.describe() for c in cells]) + "\n"
    write_output(text, cfg.output_path)

    if failed:
        raise OracleDisagreement(
            f"{len(failed)} grid cell(s) have |z| > {Z_LIMIT:g}",
            cells=[c.describe() for c in failed],
        )
    return 0
