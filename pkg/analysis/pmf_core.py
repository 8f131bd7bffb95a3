# analysis/pmf_core.py
"""
Probability mass functions on the non-negative integers and the periodic
claim model built from them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

import config
from analysis.scalars import EXACT, FLOAT, FLOAT_SLACK, Scalar, check_mode, parse_scalar
from utils.errors import EmptyWeights, InvalidParameter, NegativeWeight, ZeroTotal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Pmf:
    """
    masses[k] = P(Z = k) for k = 0..max_support.
    tail_deficit is the mass cut away from an infinite-support family and
    mean_deficit the part of the mean it carried.
    """

    masses: Tuple[Scalar, ...]
    tail_deficit: Scalar = 0.0
    mode: str = FLOAT
    mean_deficit: Scalar = 0.0

    def __post_init__(self):
        if not self.masses:
            raise EmptyWeights("A p.m.f. needs at least one mass")
        if any(m < 0 for m in self.masses) or self.tail_deficit < 0:
            raise NegativeWeight("Probability masses must be non-negative")
        total = sum(self.masses) + self.tail_deficit
        if self.mode == EXACT:
            if total != 1:
                raise InvalidParameter(f"Masses sum to {total}, expected exactly 1")
        elif abs(total - 1.0) > FLOAT_SLACK or any(m > 1.0 + FLOAT_SLACK for m in self.masses):
            raise InvalidParameter(f"Masses sum to {total!r}, expected 1 within {FLOAT_SLACK}")

    @property
    def max_support(self) -> int:
        return len(self.masses) - 1

    @property
    def is_finite(self) -> bool:
        return self.tail_deficit == 0

    def mass(self, k: int) -> Scalar:
        if 0 <= k < len(self.masses):
            return self.masses[k]
        return self._zero()

    def point_mass_location(self) -> Optional[int]:
        """Location of the atom if this is an exact point mass, else None."""
        if self.tail_deficit != 0:
            return None
        support = [k for k, m in enumerate(self.masses) if m != 0]
        if len(support) == 1 and self.masses[support[0]] == 1:
            return support[0]
        return None

    def as_array(self) -> np.ndarray:
        return np.array([float(m) for m in self.masses], dtype=float)

    def _zero(self) -> Scalar:
        return Fraction(0) if self.mode == EXACT else 0.0


# --------- constructors ----------

def pmf_from_weights(weights: Sequence, mode: str = FLOAT) -> Pmf:
    """
    Normalised p.m.f. from non-negative weights (any scale).
    Strings are read as decimals, so "0.25" stays 1/4 in exact mode.
    """
    check_mode(mode)
    if weights is None or len(weights) == 0:
        raise EmptyWeights("Weight list is empty")
    values = [parse_scalar(w, mode) for w in weights]
    if any(v < 0 for v in values):
        raise NegativeWeight(f"Negative weight in {list(weights)!r}")
    total = sum(values)
    if total == 0:
        raise ZeroTotal("Weights sum to zero")

    # trailing zeros carry no information
    while len(values) > 1 and values[-1] == 0:
        values.pop()

    if mode == EXACT:
        masses = tuple(Fraction(v) / total for v in values)
        return Pmf(masses=masses, tail_deficit=Fraction(0), mode=EXACT, mean_deficit=Fraction(0))
    masses = tuple(float(v) / float(total) for v in values)
    return Pmf(masses=masses, tail_deficit=0.0, mode=FLOAT, mean_deficit=0.0)


def point_mass(k: int, mode: str = FLOAT) -> Pmf:
    if k < 0:
        raise InvalidParameter("Point mass location must be non-negative")
    weights = [0] * k + [1]
    return pmf_from_weights(weights, mode)


def _validate_tail_eps(tail_eps: float) -> float:
    tail_eps = float(tail_eps)
    if not 0.0 < tail_eps < 1.0:
        raise InvalidParameter(f"tail_eps must lie in (0, 1), got {tail_eps}")
    return tail_eps


def pmf_poisson(lam: float, tail_eps: Optional[float] = None) -> Pmf:
    """Poisson(lam) truncated at the smallest K with P(Z > K) <= tail_eps."""
    lam = float(lam)
    if not lam > 0.0 or not np.isfinite(lam):
        raise InvalidParameter(f"Poisson rate must be positive, got {lam}")
    tail_eps = _validate_tail_eps(config.TAIL_EPS if tail_eps is None else tail_eps)

    top = 0
    while stats.poisson.sf(top, lam) > tail_eps:
        top += 1
    support = np.arange(top + 1)
    masses = stats.poisson.pmf(support, lam)
    deficit = float(stats.poisson.sf(top, lam))
    # E[Z; Z > K] = lam * P(Z >= K)
    mean_deficit = lam * float(stats.poisson.sf(top - 1, lam))
    return Pmf(
        masses=tuple(float(m) for m in masses),
        tail_deficit=deficit,
        mode=FLOAT,
        mean_deficit=mean_deficit,
    )


def pmf_geometric(p: float, tail_eps: Optional[float] = None) -> Pmf:
    """Geometric on {0, 1, ...}: P(Z = k) = p (1 - p)^k, truncated like pmf_poisson."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidParameter(f"Geometric parameter must lie in (0, 1), got {p}")
    tail_eps = _validate_tail_eps(config.TAIL_EPS if tail_eps is None else tail_eps)

    q = 1.0 - p
    top = 0
    while q ** (top + 1) > tail_eps:
        top += 1
    masses = p * q ** np.arange(top + 1)
    deficit = q ** (top + 1)
    # E[Z; Z > K] = q^(K+1) (K + 1 + q/p)
    mean_deficit = deficit * (top + 1 + q / p)
    return Pmf(
        masses=tuple(float(m) for m in masses),
        tail_deficit=float(deficit),
        mode=FLOAT,
        mean_deficit=float(mean_deficit),
    )


# --------- algebra ----------

def convolve(p: Pmf, q: Pmf) -> Pmf:
    """Distribution of the sum of independent draws from p and q."""
    if p.mode != q.mode:
        raise InvalidParameter(f"Cannot convolve a {p.mode} p.m.f. with a {q.mode} one")
    if p.mode == EXACT:
        out: List[Scalar] = [Fraction(0)] * (len(p.masses) + len(q.masses) - 1)
        for i, pm in enumerate(p.masses):
            if pm == 0:
                continue
            for j, qm in enumerate(q.masses):
                out[i + j] += pm * qm
        masses = tuple(out)
    else:
        masses = tuple(float(m) for m in np.convolve(p.as_array(), q.as_array()))

    deficit = p.tail_deficit + q.tail_deficit - p.tail_deficit * q.tail_deficit
    result = Pmf(masses=masses, tail_deficit=deficit, mode=p.mode)
    true_mean = mean(p) + p.mean_deficit + mean(q) + q.mean_deficit
    return _with_mean_deficit(result, true_mean - mean(result))


def _with_mean_deficit(pmf: Pmf, mean_deficit: Scalar) -> Pmf:
    if pmf.mode == FLOAT:
        mean_deficit = max(0.0, float(mean_deficit))
    return Pmf(masses=pmf.masses, tail_deficit=pmf.tail_deficit, mode=pmf.mode, mean_deficit=mean_deficit)


def mean(p: Pmf) -> Scalar:
    """Mean of the stored masses (the truncated part is left out)."""
    return sum((k * m for k, m in enumerate(p.masses) if m != 0), p._zero())


def cdf(p: Pmf, x: int) -> Scalar:
    """P(Z <= x); cdf(-1) = 0."""
    if x < -1:
        raise InvalidParameter(f"cdf is defined for x >= -1, got {x}")
    return sum(p.masses[: x + 1], p._zero())


def tail(p: Pmf, x: int) -> Scalar:
    """P(Z > x), including the truncated mass."""
    if x < -1:
        raise InvalidParameter(f"tail is defined for x >= -1, got {x}")
    return sum(p.masses[x + 1:], p._zero()) + p.tail_deficit


# --------- seasonal model ----------

@dataclass(frozen=True)
class SeasonalModel:
    """
    Claim distributions repeating with period m = len(seasons).
    aggregate is the distribution of one full cycle's claims.
    """

    seasons: Tuple[Pmf, ...]
    aggregate: Pmf = field(repr=False)
    mean_s: Scalar
    mode: str = FLOAT
    name: Optional[str] = None

    @property
    def period(self) -> int:
        return len(self.seasons)

    @property
    def is_finite(self) -> bool:
        return all(season.is_finite for season in self.seasons)

    @property
    def mean_deficit_bound(self) -> Scalar:
        """Amount by which mean_s underestimates the untruncated mean."""
        return self.aggregate.mean_deficit

    def leading_atom(self) -> Optional[int]:
        """Smallest k with s_k != 0 (exact test)."""
        for k, m in enumerate(self.aggregate.masses):
            if m != 0:
                return k
        return None

    def season(self, index: int) -> Pmf:
        return self.seasons[index % self.period]


def seasonal_model(seasons: Sequence[Pmf], name: Optional[str] = None) -> SeasonalModel:
    if not seasons:
        raise EmptyWeights("A seasonal model needs at least one season")
    modes = {s.mode for s in seasons}
    if len(modes) != 1:
        raise InvalidParameter("All seasons must share one numeric mode")
    aggregate = seasons[0]
    for season in seasons[1:]:
        aggregate = convolve(aggregate, season)
    model = SeasonalModel(
        seasons=tuple(seasons),
        aggregate=aggregate,
        mean_s=mean(aggregate),
        mode=seasons[0].mode,
        name=name,
    )
    if model.mode == FLOAT and model.mean_deficit_bound > 1e-9:
        logger.warning("Truncation drops %.3g from E S; consider a smaller tail_eps", model.mean_deficit_bound)
    return model
