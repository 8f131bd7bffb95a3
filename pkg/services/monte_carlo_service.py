# services/monte_carlo_service.py
"""
Seeded Monte Carlo simulation of the surplus process W(n) = u + n - (Z_1 + ... + Z_n).

Paths are simulated in fixed-size blocks. Block b draws from its own
Philox stream seeded by SeedSequence(seed, spawn_key=(b,)), so an estimate
depends only on (seed, n_paths) and never on how many workers ran it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

import config
from analysis.net_profit import require_subcritical
from analysis.pmf_core import SeasonalModel
from utils.errors import InvalidParameter

logger = logging.getLogger(__name__)

ALGORITHM = "numpy.Philox/SeedSequence(seed, spawn_key=(block,))"

DEFAULT_HORIZON = 3000


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    n_paths: int
    seed: int
    horizon: int
    algorithm: str = ALGORITHM

    @classmethod
    def from_counts(cls, ruined: int, n_paths: int, seed: int, horizon: int) -> "McEstimate":
        p_hat = ruined / n_paths
        return cls(
            p_hat=p_hat,
            std_err=math.sqrt(p_hat * (1.0 - p_hat) / n_paths),
            n_paths=n_paths,
            seed=seed,
            horizon=horizon,
        )

    def z_score(self, expected: float) -> float:
        """
        Standardised gap to ``expected`` using the spread under ``expected``.
        The variance is floored at 1/(4 n): rare cells and tiny samples never
        get a spread narrower than a single path can resolve.
        """
        variance = max(expected * (1.0 - expected), 0.25 / self.n_paths)
        return (self.p_hat - expected) / math.sqrt(variance / self.n_paths)


def _cumulative_tables(model: SeasonalModel) -> List[np.ndarray]:
    """Inverse-CDF tables; the truncated tail mass lands on the top support point."""
    tables = []
    for season in model.seasons:
        cumulative = np.cumsum(season.as_array())
        cumulative[-1] = 1.0
        tables.append(cumulative)
    return tables


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _simulate_block(args: Tuple[Sequence[np.ndarray], int, int, int, int, int, int]) -> np.ndarray:
    """counts[n] = paths of this block first ruined at step n."""
    tables, u, horizon, start_season, seed, block, size = args
    rng = _block_rng(seed, block)
    period = len(tables)
    surplus = np.full(size, u, dtype=np.int64)
    counts = np.zeros(horizon + 1, dtype=np.int64)
    for step in range(1, horizon + 1):
        if surplus.size == 0:
            break
        table = tables[(start_season + step - 1) % period]
        draws = rng.random(surplus.size)
        claims = np.minimum(np.searchsorted(table, draws, side="right"), len(table) - 1)
        surplus += 1 - claims
        hit = surplus <= 0
        counts[step] = np.count_nonzero(hit)
        # only paths still alive keep drawing
        surplus = surplus[~hit]
    return counts


def _block_sizes(n_paths: int, block: int) -> List[int]:
    full, rest = divmod(n_paths, block)
    return [block] * full + ([rest] if rest else [])


def _ruin_counts(model: SeasonalModel, u: int, horizon: int, n_paths: int, seed: int, start_season: int, workers: Optional[int]) -> np.ndarray:
    """Cumulative ruined-path counts by step, index 0..horizon."""
    if n_paths < 1:
        raise InvalidParameter("n_paths must be at least 1")
    if u < 0 or horizon < 1:
        raise InvalidParameter("Simulation needs u >= 0 and T >= 1")
    tables = _cumulative_tables(model)
    sizes = _block_sizes(n_paths, config.MC_BLOCK)
    jobs = [(tables, u, horizon, start_season, seed, b, size) for b, size in enumerate(sizes)]

    workers = min(workers or config.worker_count(), len(jobs))
    if workers > 1:
        logger.info("Simulating %d blocks on %d workers", len(jobs), workers)
        with ProcessPoolExecutor(max_workers=workers) as executor:
            counts = list(executor.map(_simulate_block, jobs))
    else:
        counts = [_simulate_block(job) for job in jobs]
    return np.cumsum(np.sum(counts, axis=0))


def mc_finite_time(
    model: SeasonalModel,
    u: int,
    horizon: int,
    n_paths: int,
    seed: int,
    start_season: int = 0,
    workers: Optional[int] = None,
) -> McEstimate:
    """Estimate psi(u, T) from n_paths simulated trajectories."""
    counts = _ruin_counts(model, u, horizon, n_paths, seed, start_season, workers)
    return McEstimate.from_counts(int(counts[horizon]), n_paths, seed, horizon)


def mc_finite_time_horizons(
    model: SeasonalModel,
    u: int,
    horizons: Sequence[int],
    n_paths: int,
    seed: int,
    start_season: int = 0,
    workers: Optional[int] = None,
) -> List[McEstimate]:
    """One simulation to max(horizons), read off at every requested horizon."""
    longest = max(horizons)
    counts = _ruin_counts(model, u, longest, n_paths, seed, start_season, workers)
    return [McEstimate.from_counts(int(counts[t]), n_paths, seed, t) for t in horizons]


def mc_ultimate_proxy(
    model: SeasonalModel,
    u: int,
    n_paths: int,
    seed: int,
    horizon: int = DEFAULT_HORIZON,
    workers: Optional[int] = None,
) -> McEstimate:
    """
    Long-horizon stand-in for psi(u). It counts only ruin by ``horizon``, so
    it sits below psi(u) on average; the gap shrinks as the horizon grows.
    """
    require_subcritical(model)
    counts = _ruin_counts(model, u, horizon, n_paths, seed, 0, workers)
    return McEstimate.from_counts(int(counts[horizon]), n_paths, seed, horizon)
