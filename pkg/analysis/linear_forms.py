# analysis/linear_forms.py
"""
Shared machinery of the ultimate solvers.

Every survival value is carried as a linear form

    phi(n) = alpha_n phi(0) + beta_n phi(1) + gamma_n (3 - E S)

so the unknown initial values can be fixed afterwards, either by exact
constraints or by the far-field condition phi(N) = phi(N + 1) = 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, List, Optional, Protocol, Sequence, Tuple, Union

import config
from analysis.pmf_core import SeasonalModel
from analysis.scalars import (
    FLOAT,
    MAX_EXTENDED_BITS,
    GUARD_BITS,
    Arithmetic,
    Scalar,
    arithmetic_for,
)
from utils.errors import IllConditionedBoundary, PrecisionExhausted

logger = logging.getLogger(__name__)

DEFAULT_BOUNDARY_INDEX = 250

# Float rows that feed reported values or the far-field residual must stay below this
FLOAT_WINDOW_LIMIT = 1e5

# |det| below this times the row norms is treated as singular
SINGULAR_RATIO = 1e-30

# Indices before the boundary used for the far-field residual
RESIDUAL_WINDOW = 8


@dataclass(frozen=True)
class SolveOptions:
    boundary_index: Union[int, str] = "adaptive"
    u_max: int = 20
    precision_escalation: bool = True
    printed_formulas: bool = False
    tolerance: float = 1e-10
    max_boundary_index: int = 16384

    @classmethod
    def from_config(cls, **overrides) -> "SolveOptions":
        return cls(boundary_index=config.BOUNDARY_INDEX, **overrides)

    @property
    def adaptive(self) -> bool:
        return not isinstance(self.boundary_index, int)


@dataclass(frozen=True)
class SurvivalVector:
    """
    phi(u) = 1 - psi(u) for u = 0..u_max, clamped to [0, 1];
    raw_phi keeps the values before clamping.
    """

    phi: Tuple[Scalar, ...]
    raw_phi: Tuple[Scalar, ...]
    boundary_index: Optional[int]
    residual: Scalar
    branch: str
    precision: str = FLOAT
    escalations: int = 0

    @property
    def psi(self) -> Tuple[Scalar, ...]:
        return tuple(1 - v for v in self.phi)

    @property
    def u_max(self) -> int:
        return len(self.phi) - 1

    def metadata(self) -> dict:
        return {
            "branch": self.branch,
            "boundary_index": self.boundary_index,
            "precision": self.precision,
            "escalations": self.escalations,
            "residual": float(self.residual),
        }


@dataclass(frozen=True)
class CoefficientTriple:
    alpha: Scalar
    beta: Scalar
    gamma: Scalar

    def evaluate(self, phi0: Scalar, phi1: Scalar, drift: Scalar) -> Scalar:
        return self.alpha * phi0 + self.beta * phi1 + self.gamma * drift

    def is_zero(self) -> bool:
        return self.alpha == 0 and self.beta == 0 and self.gamma == 0

    def scaled(self, factor: Scalar) -> "CoefficientTriple":
        return CoefficientTriple(self.alpha * factor, self.beta * factor, self.gamma * factor)


class PrecisionShortfall(Exception):
    """Internal signal: the current arithmetic cannot carry the coefficients."""

    def __init__(self, bits_needed: Optional[int], where: str):
        super().__init__(where)
        self.bits_needed = bits_needed
        self.where = where


class CoefficientRows:
    """Growing columns alpha, beta, gamma with a magnitude guard on every append."""

    def __init__(self, arithmetic: Arithmetic):
        self.arithmetic = arithmetic
        self.alpha: List[Scalar] = []
        self.beta: List[Scalar] = []
        self.gamma: List[Scalar] = []

    def __len__(self) -> int:
        return len(self.alpha)

    def append(self, alpha: Scalar, beta: Scalar, gamma: Scalar) -> None:
        for value in (alpha, beta, gamma):
            bits = self.arithmetic.magnitude_bits(value)
            if bits is not None:
                raise PrecisionShortfall(bits, f"coefficient row {len(self.alpha)}")
        self.alpha.append(alpha)
        self.beta.append(beta)
        self.gamma.append(gamma)

    def append_triple(self, triple: CoefficientTriple) -> None:
        self.append(triple.alpha, triple.beta, triple.gamma)

    def row(self, n: int) -> CoefficientTriple:
        return CoefficientTriple(self.alpha[n], self.beta[n], self.gamma[n])

    def largest(self, upto: int) -> float:
        top = min(upto + 1, len(self))
        return max(
            (float(abs(v)) for column in (self.alpha, self.beta, self.gamma) for v in column[:top]),
            default=0.0,
        )


def at(seq: Sequence[Scalar], k: int, zero: Scalar) -> Scalar:
    if 0 <= k < len(seq):
        return seq[k]
    return zero


# --------- season data in solver arithmetic ----------

def _conv(x: Sequence[Scalar], y: Sequence[Scalar], zero: Scalar) -> List[Scalar]:
    out = [zero] * (len(x) + len(y) - 1)
    for i, xi in enumerate(x):
        if xi == 0:
            continue
        for j, yj in enumerate(y):
            out[i + j] += xi * yj
    return out


@dataclass
class SeasonTerms:
    """a, b, c, s = a*b*c and the partial products a*b, b*c, converted once per arithmetic."""

    arithmetic: Arithmetic
    a: List[Scalar]
    b: List[Scalar]
    c: List[Scalar]
    s: List[Scalar] = field(init=False)
    ab: List[Scalar] = field(init=False)
    bc: List[Scalar] = field(init=False)
    drift: Scalar = field(init=False)
    zero: Scalar = field(init=False)
    one: Scalar = field(init=False)

    def __post_init__(self):
        zero = self.zero = self.arithmetic.scalar(0)
        self.one = self.arithmetic.scalar(1)
        self.ab = _conv(self.a, self.b, zero)
        self.bc = _conv(self.b, self.c, zero)
        self.s = _conv(self.ab, self.c, zero)
        mean_s = sum((k * m for k, m in enumerate(self.s) if m != 0), zero)
        self.drift = self.scalar(3) - mean_s

    @classmethod
    def from_model(cls, model: SeasonalModel, arithmetic: Arithmetic) -> "SeasonTerms":
        convert = arithmetic.scalar
        a, b, c = ([convert(m) for m in season.masses] for season in model.seasons)
        return cls(arithmetic=arithmetic, a=a, b=b, c=c)

    def scalar(self, value) -> Scalar:
        return self.arithmetic.scalar(value)

    def get(self, name: str, k: int) -> Scalar:
        return at(getattr(self, name), k, self.zero)

    def s_dot(self, values: Sequence[Scalar], n: int, k_low: int, k_high: int, shift: int = 0) -> Scalar:
        """sum_{k=k_low..k_high} s_k * values[n - k + shift], skipping s_k past the support."""
        total = self.zero
        for k in range(k_low, min(k_high, len(self.s) - 1) + 1):
            sk = self.s[k]
            if sk != 0:
                total += sk * values[n - k + shift]
        return total


class Propagator(Protocol):
    rows: CoefficientRows

    def extend_to(self, n: int) -> None:
        ...

    def constraints(self) -> List[CoefficientTriple]:
        ...


# --------- far-field closure ----------

Equation = Tuple[Scalar, Scalar, Scalar]


def _solve_pair(first: Equation, second: Equation) -> Tuple[Scalar, Scalar]:
    """Solve p phi0 + q phi1 = r for two equations."""
    p1, q1, r1 = first
    p2, q2, r2 = second
    det = p1 * q2 - q1 * p2
    norm1 = max(abs(p1), abs(q1))
    norm2 = max(abs(p2), abs(q2))
    if norm1 == 0 or norm2 == 0:
        raise IllConditionedBoundary("Boundary system has an all-zero equation")
    # exact rows exceed the float range
    ratio = Fraction(SINGULAR_RATIO) if isinstance(det, Fraction) else SINGULAR_RATIO
    relative = abs(det) / (norm1 * norm2)
    if relative <= ratio:
        raise IllConditionedBoundary(f"Boundary system is singular (relative det={float(relative):.3g})")
    return (r1 * q2 - q1 * r2) / det, (p1 * r2 - r1 * p2) / det


def _constraint_equation(triple: CoefficientTriple, drift: Scalar) -> Equation:
    return triple.alpha, triple.beta, -triple.gamma * drift


def _far_equation(triple: CoefficientTriple, drift: Scalar, one: Scalar) -> Equation:
    return triple.alpha, triple.beta, one - triple.gamma * drift


def _solve_constraints(equations: List[Equation]) -> Tuple[Scalar, Scalar]:
    last_error: Optional[IllConditionedBoundary] = None
    for i in range(len(equations)):
        for j in range(i + 1, len(equations)):
            try:
                return _solve_pair(equations[i], equations[j])
            except IllConditionedBoundary as exc:
                last_error = exc
    raise last_error or IllConditionedBoundary("No independent pair of constraints")


def _solve_at(terms: SeasonTerms, propagator: Propagator, constraints: List[Equation], boundary: int, opts: SolveOptions) -> Tuple[Scalar, Scalar, int]:
    needed = 2 - len(constraints)
    failure: Optional[IllConditionedBoundary] = None
    for offset in (0, 1, 2):
        index = boundary + offset
        propagator.extend_to(index + 1)
        check_window(terms, propagator.rows, index + 1, opts)
        far = [
            _far_equation(propagator.rows.row(index + i), terms.drift, terms.one)
            for i in range(needed)
        ]
        system = constraints + far
        try:
            phi0, phi1 = _solve_pair(system[0], system[1])
            return phi0, phi1, index
        except IllConditionedBoundary as exc:
            failure = exc
            logger.debug("Boundary %d singular, trying the next offset", index)
    raise failure


def _adaptive_solve(terms: SeasonTerms, propagator: Propagator, constraints: List[Equation], opts: SolveOptions) -> Tuple[Scalar, Scalar, int]:
    if not opts.adaptive:
        return _solve_at(terms, propagator, constraints, int(opts.boundary_index), opts)

    boundary = DEFAULT_BOUNDARY_INDEX
    previous = _solve_at(terms, propagator, constraints, boundary, opts)
    while True:
        boundary *= 2
        if boundary > opts.max_boundary_index:
            logger.warning(
                "Far-field boundary did not settle below %d; keeping N=%d",
                opts.max_boundary_index,
                previous[2],
            )
            return previous
        current = _solve_at(terms, propagator, constraints, boundary, opts)
        change = max(abs(current[0] - previous[0]), abs(current[1] - previous[1]))
        logger.debug("N=%d phi(0)=%.15g change=%.3g", boundary, float(current[0]), float(change))
        if change < opts.tolerance:
            return current
        previous = current


def check_window(terms: SeasonTerms, rows: CoefficientRows, upto: int, opts: SolveOptions) -> None:
    if terms.arithmetic.name != FLOAT or terms.arithmetic.extended:
        return
    largest = rows.largest(upto)
    if largest <= FLOAT_WINDOW_LIMIT:
        return
    if opts.precision_escalation:
        raise PrecisionShortfall(int(math.log2(largest)) + GUARD_BITS, "evaluation window")
    logger.warning("Coefficients reach %.3g by row %d; float results may be inaccurate", largest, upto)


def report_value(value: Scalar, arithmetic: Arithmetic) -> Scalar:
    return value if arithmetic.exact else float(value)


def clamp_survival(raw: Sequence[Scalar], branch: str) -> Tuple[Scalar, ...]:
    clamped = []
    for u, value in enumerate(raw):
        bounded = min(max(value, 0), 1)
        if abs(bounded - value) > 1e-6:
            logger.warning("Branch %s: clamp moved phi(%d) from %.9g", branch, u, float(value))
        clamped.append(bounded)
    for u in range(1, len(clamped)):
        if clamped[u] < clamped[u - 1] - 1e-9:
            logger.warning("Branch %s: phi decreases at u=%d", branch, u)
            break
    return tuple(clamped)


def close_linear(terms: SeasonTerms, propagator: Propagator, opts: SolveOptions, branch: str) -> SurvivalVector:
    """
    Fix phi(0), phi(1) from the propagator's constraints plus as many
    far-field rows as are still missing, then evaluate phi(0..u_max).
    """
    arithmetic = terms.arithmetic
    window_end = max(opts.u_max + 3, RESIDUAL_WINDOW)
    propagator.extend_to(window_end)
    check_window(terms, propagator.rows, opts.u_max + 3, opts)

    constraints = [_constraint_equation(c, terms.drift) for c in propagator.constraints() if not c.is_zero()]
    if len(constraints) >= 2:
        phi0, phi1 = _solve_constraints(constraints)
        boundary: Optional[int] = None
    else:
        phi0, phi1, boundary = _adaptive_solve(terms, propagator, constraints, opts)
        logger.info("Branch %s closed at N=%d (%s)", branch, boundary, arithmetic.label)

    check_at = boundary if boundary is not None else (
        DEFAULT_BOUNDARY_INDEX if opts.adaptive else int(opts.boundary_index)
    )
    check_at = max(check_at, opts.u_max + 1 + RESIDUAL_WINDOW)
    propagator.extend_to(check_at)
    check_window(terms, propagator.rows, check_at, opts)
    rows = propagator.rows
    residual = max(
        abs(rows.row(n).evaluate(phi0, phi1, terms.drift) - terms.one)
        for n in range(check_at - RESIDUAL_WINDOW, check_at)
    )

    raw = tuple(
        report_value(rows.row(u).evaluate(phi0, phi1, terms.drift), arithmetic)
        for u in range(opts.u_max + 1)
    )
    return SurvivalVector(
        phi=clamp_survival(raw, branch),
        raw_phi=raw,
        boundary_index=boundary,
        residual=report_value(residual, arithmetic),
        branch=branch,
        precision=arithmetic.label,
    )


# --------- precision ladder ----------

def solve_with_escalation(model: SeasonalModel, opts: SolveOptions, attempt: Callable[[SeasonTerms], SurvivalVector]) -> SurvivalVector:
    """
    Run ``attempt`` in the model's arithmetic; on a precision shortfall restart
    it in extended precision, doubling the mantissa until it fits.
    """
    arithmetic = arithmetic_for(model.mode)
    escalations = 0
    while True:
        try:
            with arithmetic.active():
                terms = SeasonTerms.from_model(model, arithmetic)
                result = attempt(terms)
            return replace(result, precision=arithmetic.label, escalations=escalations)
        except PrecisionShortfall as shortfall:
            if not opts.precision_escalation:
                raise PrecisionExhausted(
                    f"Coefficients overflow {arithmetic.label} at {shortfall.where} and escalation is off"
                )
            upgraded = arithmetic.escalated(shortfall.bits_needed)
            if upgraded.bits > MAX_EXTENDED_BITS:
                raise PrecisionExhausted(
                    f"Coefficients need {shortfall.bits_needed} bits at {shortfall.where}; limit is {MAX_EXTENDED_BITS}"
                )
            logger.info(
                "Precision %s -> %s (%s needs %s bits)",
                arithmetic.label,
                upgraded.label,
                shortfall.where,
                shortfall.bits_needed,
            )
            arithmetic = upgraded
            escalations += 1
