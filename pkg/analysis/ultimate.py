# analysis/ultimate.py
"""
Ultimate survival phi(u) = 1 - psi(u) for three-season models with E S < 3.

Two independent solvers:
  - ultimate_branch: one closed recursion per zero pattern of
    (a0, a1, b0, b1, c0, c1), ten cases in all;
  - ultimate_generic: branch-free propagation of the two cycle identities

        3 - E S = phi(0) + b0 c0 phi(2) + (b0 c1 + c0) phi(1)
        phi(u)  = sum_{k=0..u+2} s_{u+2-k} phi(k+1) - a_{u+1} b0 c0 phi(2)
                  - a_{u+1} b0 c1 phi(1) - c0 phi(1) sum_{k=0..u+2} a_k b_{u+2-k}

    solving each one for its highest still-unknown index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import mpmath

from analysis.linear_forms import (
    DEFAULT_BOUNDARY_INDEX,
    CoefficientRows,
    CoefficientTriple,
    SeasonTerms,
    SolveOptions,
    SurvivalVector,
    check_window,
    clamp_survival,
    close_linear,
    report_value,
    solve_with_escalation,
)
from analysis.net_profit import classify_net_profit, require_subcritical
from analysis.pmf_core import Pmf, SeasonalModel, mean, tail
from analysis.scalars import EXACT, FLOAT, Scalar, arithmetic_for
from utils.errors import IllConditionedBoundary, NetProfitViolated, NoBranchMatched, WrongPeriod

logger = logging.getLogger(__name__)

BRANCH_NAMES: Dict[int, str] = {
    1: "s₀≠0",
    2: "a₀=0, a₁≠0",
    3: "b₀=0, b₁≠0",
    4: "c₀=0, c₁≠0",
    5: "a₀=b₀=0",
    6: "a₀=c₀=0",
    7: "b₀=c₀=0",
    8: "a₀=a₁=0",
    9: "b₀=b₁=0",
    10: "c₀=c₁=0",
}

# Branches whose printed closed form differs from the one derived from the cycle identities
PRINTED_DIFFERS = (2, 4, 6, 7, 8, 10)


# --------- dispatch ----------

def branch_id(model: SeasonalModel) -> int:
    """Zero-pattern case of (a0, a1, b0, b1, c0, c1), exact tests on stored masses."""
    if model.period != 3:
        raise WrongPeriod(f"Branch dispatch needs 3 seasons, got {model.period}")
    a, b, c = model.seasons
    a0, a1 = a.mass(0) != 0, a.mass(1) != 0
    b0, b1 = b.mass(0) != 0, b.mass(1) != 0
    c0, c1 = c.mass(0) != 0, c.mass(1) != 0

    if a0 and b0 and c0:
        return 1
    if not a0 and b0 and c0:
        return 2 if a1 else 8
    if a0 and not b0 and c0:
        return 3 if b1 else 9
    if a0 and b0 and not c0:
        return 4 if c1 else 10
    if not a0 and not b0 and c0:
        return 5
    if not a0 and b0 and not c0:
        return 6
    if a0 and not b0 and not c0:
        return 7
    raise NoBranchMatched("a0 = b0 = c0 = 0 puts every cycle's claims at 3 or more")


# --------- branch recursions ----------

def _base_rows(terms: SeasonTerms) -> CoefficientRows:
    rows = CoefficientRows(terms.arithmetic)
    zero, one = terms.zero, terms.one
    rows.append(one, zero, zero)
    rows.append(zero, one, zero)
    return rows


def _row_two(terms: SeasonTerms) -> CoefficientTriple:
    """phi(2) from the first identity; needs b0 c0 != 0."""
    b0c0 = terms.b[0] * terms.c[0]
    b0c1 = terms.b[0] * terms.get("c", 1)
    c0 = terms.c[0]
    return CoefficientTriple(-terms.one / b0c0, -(b0c1 + c0) / b0c0, terms.one / b0c0)


class _LeadZeroRecursion:
    """Case s0 != 0: alpha/beta/gamma, each step divides by s0."""

    def __init__(self, terms: SeasonTerms):
        self.terms = terms
        self.rows = _base_rows(terms)
        self.rows.append_triple(_row_two(terms))

    def constraints(self) -> List[CoefficientTriple]:
        return []

    def extend_to(self, n: int) -> None:
        t, rows = self.terms, self.rows
        s0 = t.s[0]
        c0 = t.c[0]
        while len(rows) <= n:
            m = len(rows)
            forcing = t.get("a", m - 2)
            alpha = (rows.alpha[m - 3] - t.s_dot(rows.alpha, m, 1, m - 1) - forcing) / s0
            beta = (
                rows.beta[m - 3] - t.s_dot(rows.beta, m, 1, m - 1)
                - forcing * c0 + c0 * t.get("ab", m - 1)
            ) / s0
            gamma = (rows.gamma[m - 3] - t.s_dot(rows.gamma, m, 1, m - 1) + forcing) / s0
            rows.append(alpha, beta, gamma)


class _LeadOneRecursion:
    """
    Cases with s0 = 0, s1 != 0. One unknown survives; its coefficient x and
    the drift coefficient g follow

        x_n = (x_{n-2} - sum_{k=2..n} s_k x_{n-k+1} + F(n)) / s1,   g likewise with G(n).
    """

    def __init__(
        self,
        terms: SeasonTerms,
        x_init: List[Scalar],
        g_init: List[Scalar],
        forcing: Callable[[int], Tuple[Scalar, Scalar]],
        slot: str,
        constraints: List[CoefficientTriple],
    ):
        self.terms = terms
        self.x = list(x_init)
        self.g = list(g_init)
        self.forcing = forcing
        self.slot = slot
        self._constraints = constraints
        self.rows = _base_rows(terms)
        for n in range(2, len(self.x)):
            self._emit(n)

    def constraints(self) -> List[CoefficientTriple]:
        return list(self._constraints)

    def _emit(self, n: int) -> None:
        zero = self.terms.zero
        if self.slot == "beta":
            self.rows.append(zero, self.x[n], self.g[n])
        else:
            self.rows.append(self.x[n], zero, self.g[n])

    def extend_to(self, n: int) -> None:
        t = self.terms
        s1 = t.s[1]
        while len(self.rows) <= n:
            m = len(self.x)
            push_x, push_g = self.forcing(m)
            self.x.append((self.x[m - 2] - t.s_dot(self.x, m, 2, m, 1) + push_x) / s1)
            self.g.append((self.g[m - 2] - t.s_dot(self.g, m, 2, m, 1) + push_g) / s1)
            self._emit(m)


class _LeadTwoRecursion:
    """
    Cases with s0 = s1 = 0: both initial values are known in closed form and

        phi(u+1) = ((1 - s3) phi(u) + sign * sum_{k=1..u-1} phi(k) s_{u+3-k} + E(u)) / s2.
    """

    def __init__(
        self,
        terms: SeasonTerms,
        constraints: List[CoefficientTriple],
        extra: Optional[Callable[[int, CoefficientRows], CoefficientTriple]] = None,
        sign: int = -1,
        start: int = 1,
    ):
        self.terms = terms
        self.rows = _base_rows(terms)
        if start == 2:
            self.rows.append_triple(_row_two(terms))
        self.start = start
        self.extra = extra
        self.sign = sign
        self._constraints = constraints

    def constraints(self) -> List[CoefficientTriple]:
        return list(self._constraints)

    def extend_to(self, n: int) -> None:
        t, rows = self.terms, self.rows
        s2 = t.s[2]
        keep = t.one - t.get("s", 3)
        while len(rows) <= n:
            u = len(rows) - 1
            columns = []
            for column in (rows.alpha, rows.beta, rows.gamma):
                history = t.zero
                for k in range(max(1, u + 3 - (len(t.s) - 1)), u):
                    sk = t.s[u + 3 - k]
                    if sk != 0:
                        history += column[k] * sk
                columns.append(keep * column[u] + (history if self.sign > 0 else -history))
            if self.extra is not None:
                bump = self.extra(u, rows)
                columns = [columns[0] + bump.alpha, columns[1] + bump.beta, columns[2] + bump.gamma]
            rows.append(columns[0] / s2, columns[1] / s2, columns[2] / s2)


def _fixed(terms: SeasonTerms, phi0_over_drift: Scalar, phi1_over_drift: Scalar) -> List[CoefficientTriple]:
    """Constraints phi(0) = v0 (3 - E S), phi(1) = v1 (3 - E S)."""
    zero, one = terms.zero, terms.one
    return [
        CoefficientTriple(one, zero, -phi0_over_drift),
        CoefficientTriple(zero, one, -phi1_over_drift),
    ]


def _branch_propagator(terms: SeasonTerms, branch: int, printed: bool):
    t = terms
    zero, one = t.zero, t.one
    a0, b0, c0 = t.get("a", 0), t.get("b", 0), t.get("c", 0)
    c1, b1 = t.get("c", 1), t.get("b", 1)

    def phi1_row(u: int, rows: CoefficientRows) -> CoefficientTriple:
        return CoefficientTriple(zero, c0 * t.get("ab", u + 2), zero)

    if branch == 1:
        return _LeadZeroRecursion(t)

    if branch == 2:
        two = _row_two(t)
        return _LeadOneRecursion(
            t,
            x_init=[zero, one, two.beta],
            g_init=[zero, zero, two.gamma],
            forcing=lambda n: (-t.get("a", n - 1) * c0 + c0 * t.get("ab", n), t.get("a", n - 1)),
            slot="beta",
            constraints=[CoefficientTriple(one, zero, zero)],
        )

    if branch == 3:
        x1, g1 = -one / c0, one / c0
        x2 = c1 / (c0 * c0) + one / (a0 * b1 * c0)
        g2 = -c1 / (c0 * c0)
        return _LeadOneRecursion(
            t,
            x_init=[one, x1, x2],
            g_init=[zero, g1, g2],
            forcing=lambda n: (-t.get("ab", n), t.get("ab", n)),
            slot="alpha",
            constraints=[CoefficientTriple(x1, -one, g1)],
        )

    if branch == 4:
        x1, g1 = -one / (b0 * c1), one / (b0 * c1)
        if printed:
            def forcing(n: int) -> Tuple[Scalar, Scalar]:
                push = sum((t.get("a", k) * t.get("b", n - k) for k in range(n)), zero)
                return -push, push
        else:
            def forcing(n: int) -> Tuple[Scalar, Scalar]:
                return -t.get("a", n - 1), t.get("a", n - 1)
        return _LeadOneRecursion(
            t,
            x_init=[one, x1],
            g_init=[zero, g1],
            forcing=forcing,
            slot="alpha",
            constraints=[CoefficientTriple(x1, -one, g1)],
        )

    s2 = t.s[2]
    if branch in (5, 9):
        return _LeadTwoRecursion(t, _fixed(t, zero, one / c0), extra=phi1_row)

    if branch == 6:
        if printed:
            constraints = [
                CoefficientTriple(one, -s2, zero),
                CoefficientTriple(zero, one, -one / (s2 + b0 * c1)),
            ]
        else:
            constraints = _fixed(t, zero, one / (b0 * c1))

        def bump(u: int, rows: CoefficientRows) -> CoefficientTriple:
            return CoefficientTriple(zero, t.get("a", u + 1) * b0 * c1, zero)

        return _LeadTwoRecursion(t, constraints, extra=bump)

    if branch in (7, 10):
        return _LeadTwoRecursion(t, _fixed(t, one, one / s2), sign=1 if printed else -1)

    if branch == 8:
        a2 = t.get("a", 2)
        if printed:
            return _LeadTwoRecursion(t, _fixed(t, zero, one / (one / a2 + c0)), extra=phi1_row)

        def bump(u: int, rows: CoefficientRows) -> CoefficientTriple:
            lead = t.get("a", u + 1) * b0
            two = rows.row(2).scaled(lead * c0)
            return CoefficientTriple(two.alpha, two.beta + lead * c1 + c0 * t.get("ab", u + 2), two.gamma)

        return _LeadTwoRecursion(t, _fixed(t, zero, zero), extra=bump, start=2)

    raise NoBranchMatched(f"Unknown branch {branch}")


def _printed_quadratic_branch(terms: SeasonTerms, opts: SolveOptions) -> SurvivalVector:
    """
    Case a0 = 0, a1 != 0 with the beta-hat forcing -a_{n-1} c0 - c0 phi(1) sum a_k b_{n-k}:
    phi(n) = b_n x + d_n x^2 + g_n (3 - E S) with x = phi(1), closed by phi(N) = 1.
    """
    t = terms
    zero, one = t.zero, t.one
    c0 = t.c[0]
    s1 = t.s[1]
    two = _row_two(t)
    lin = [zero, one, two.beta]
    quad = [zero, zero, zero]
    drift = [zero, zero, two.gamma]
    window = CoefficientRows(t.arithmetic)

    def extend(n: int) -> None:
        while len(lin) <= n:
            m = len(lin)
            lin.append((lin[m - 2] - t.s_dot(lin, m, 2, m, 1) - t.get("a", m - 1) * c0) / s1)
            quad.append((quad[m - 2] - t.s_dot(quad, m, 2, m, 1) - c0 * t.get("ab", m)) / s1)
            drift.append((drift[m - 2] - t.s_dot(drift, m, 2, m, 1) + t.get("a", m - 1)) / s1)
            window.append(lin[m], quad[m], drift[m])

    def evaluate(n: int, x: Scalar) -> Scalar:
        return lin[n] * x + quad[n] * x * x + drift[n] * t.drift

    def root_at(n: int) -> Scalar:
        extend(n)
        qa, qb, qc = quad[n], lin[n], drift[n] * t.drift - one
        if qa == 0:
            if qb == 0:
                raise IllConditionedBoundary("Printed boundary equation is degenerate")
            return -qc / qb
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            return -qb / (2 * qa)
        root = mpmath.sqrt(disc) if t.arithmetic.extended else disc ** 0.5
        candidates = [(-qb + root) / (2 * qa), (-qb - root) / (2 * qa)]
        return min(candidates, key=lambda x: (max(x - 1, 0 - x, 0), x))

    extend(max(opts.u_max + 3, 8))
    check_window(t, window, opts.u_max + 3, opts)
    if opts.adaptive:
        boundary = DEFAULT_BOUNDARY_INDEX
        x = root_at(boundary)
        while boundary * 2 <= opts.max_boundary_index:
            nxt = root_at(boundary * 2)
            boundary *= 2
            settled = abs(nxt - x) < opts.tolerance
            x = nxt
            if settled:
                break
    else:
        boundary = int(opts.boundary_index)
        x = root_at(boundary)

    residual = max(abs(evaluate(n, x) - one) for n in range(boundary - 8, boundary))
    raw = tuple(report_value(zero if u == 0 else evaluate(u, x), t.arithmetic) for u in range(opts.u_max + 1))
    return SurvivalVector(
        phi=clamp_survival(raw, "2"),
        raw_phi=raw,
        boundary_index=boundary,
        residual=report_value(residual, t.arithmetic),
        branch="2",
    )


def ultimate_branch(model: SeasonalModel, opts: Optional[SolveOptions] = None) -> SurvivalVector:
    """Survival vector from the closed recursion of the model's zero-pattern case."""
    opts = opts or SolveOptions.from_config()
    require_subcritical(model)
    branch = branch_id(model)
    logger.debug("Dispatching to branch %d (%s)", branch, BRANCH_NAMES[branch])
    label = str(branch)
    printed = opts.printed_formulas and branch in PRINTED_DIFFERS

    if printed and branch == 2:
        # the boundary quadratic needs a square root, so exact models run in float
        source = replace(model, mode=FLOAT) if model.mode == EXACT else model
        return solve_with_escalation(source, opts, lambda terms: _printed_quadratic_branch(terms, opts))

    def attempt(terms: SeasonTerms) -> SurvivalVector:
        return close_linear(terms, _branch_propagator(terms, branch, printed), opts, label)

    return solve_with_escalation(model, opts, attempt)



# --------- generic solver ----------

class _IdentityPropagation:
    """
    Processes the first identity, then the second at u = 0, 1, 2, ...
    An equation whose only undefined index with a non-zero coefficient is
    the next row defines that row; one with none left becomes a constraint.
    """

    def __init__(self, terms: SeasonTerms):
        self.terms = terms
        self.rows = _base_rows(terms)
        self._constraints: List[CoefficientTriple] = []
        self._next_u = -1

    def constraints(self) -> List[CoefficientTriple]:
        return list(self._constraints)

    def _first_identity(self) -> Dict[int, Scalar]:
        t = self.terms
        b0, c0, c1 = t.get("b", 0), t.get("c", 0), t.get("c", 1)
        return {0: t.one, 1: b0 * c1 + c0, 2: b0 * c0}

    def _second_identity(self, u: int) -> Dict[int, Scalar]:
        t = self.terms
        zero = t.zero
        coef: Dict[int, Scalar] = {}
        for j in range(max(3, u + 3 - (len(t.s) - 1)), u + 4):
            sk = t.s[u + 3 - j]
            if sk != 0:
                coef[j] = sk
        # phi(2): s_{u+1} minus a_{u+1} b0 c0, i.e. sum_{i<=u} a_i (b*c)_{u+1-i}
        two = sum((t.a[i] * t.get("bc", u + 1 - i) for i in range(min(u, len(t.a) - 1) + 1)), zero)
        # phi(1): s_{u+2} minus a_{u+1} b0 c1 minus c0 (a*b)_{u+2}
        one = t.get("c", 1) * sum((t.a[i] * t.get("b", u + 1 - i) for i in range(min(u, len(t.a) - 1) + 1)), zero)
        one += sum((t.c[l] * t.get("ab", u + 2 - l) for l in range(2, min(u + 2, len(t.c) - 1) + 1)), zero)
        if two != 0:
            coef[2] = coef.get(2, zero) + two
        if one != 0:
            coef[1] = coef.get(1, zero) + one
        coef[u] = coef.get(u, zero) - t.one
        return coef

    def _consume(self, coef: Dict[int, Scalar], drift: Scalar, where: str) -> None:
        rows = self.rows
        defined = len(rows)
        pending = sorted(j for j, v in coef.items() if j >= defined and v != 0)
        if pending and pending != [defined]:
            raise NoBranchMatched(f"{where} leaves indices {pending} undetermined")
        zero = self.terms.zero
        alpha, beta, gamma = zero, zero, drift
        for j, v in coef.items():
            if j >= defined or v == 0:
                continue
            alpha += v * rows.alpha[j]
            beta += v * rows.beta[j]
            gamma += v * rows.gamma[j]
        if not pending:
            self._constraints.append(CoefficientTriple(alpha, beta, gamma))
            return
        lead = coef[defined]
        rows.append(-alpha / lead, -beta / lead, -gamma / lead)

    def extend_to(self, n: int) -> None:
        stalled = 0
        while len(self.rows) <= n:
            before = len(self.rows)
            if self._next_u < 0:
                self._consume(self._first_identity(), -self.terms.one, "first identity")
            else:
                self._consume(self._second_identity(self._next_u), self.terms.zero, f"identity at u={self._next_u}")
            self._next_u += 1
            stalled = stalled + 1 if len(self.rows) == before else 0
            if stalled > 3:
                raise NoBranchMatched("Leading aggregate atoms s0 = s1 = s2 = 0; propagation cannot advance")


def ultimate_generic(model: SeasonalModel, opts: Optional[SolveOptions] = None) -> SurvivalVector:
    """Branch-free survival vector from the two cycle identities."""
    opts = opts or SolveOptions.from_config()
    require_subcritical(model)
    lead = model.leading_atom()
    if lead is None or lead > 2:
        raise NoBranchMatched(f"Leading aggregate atom {lead} is beyond s2")

    def attempt(terms: SeasonTerms) -> SurvivalVector:
        return close_linear(terms, _IdentityPropagation(terms), opts, "generic")

    return solve_with_escalation(model, opts, attempt)


def coefficient_rows(model: SeasonalModel, count: int, solver: str = "generic") -> List[CoefficientTriple]:
    """First ``count`` rows of the linear forms in the model's own arithmetic."""
    terms = SeasonTerms.from_model(model, arithmetic_for(model.mode))
    if solver == "generic":
        propagator = _IdentityPropagation(terms)
    else:
        propagator = _branch_propagator(terms, branch_id(model), printed=False)
    propagator.extend_to(count - 1)
    return [propagator.rows.row(n) for n in range(count)]


# --------- homogeneous model ----------

def homogeneous_ultimate(claim: Pmf, u_max: int) -> SurvivalVector:
    """
    psi(0) = E Z and, for u >= 1,
    P(Z = 0) psi(u) = sum_{j=1..u-1} P(Z > j) psi(u-j) + sum_{j>=u} P(Z > j),
    with the tail sum taken as E Z - sum_{j<u} P(Z > j). The j = 0 term of
    the renewal sum carries psi(u) itself and has been moved to the left.
    """
    ez = mean(claim)
    if ez >= 1:
        raise NetProfitViolated(f"E Z = {float(ez):.6g} >= 1; ruin is certain")
    exceed = [tail(claim, j) for j in range(u_max + 1)]
    # E Z < 1 forces P(Z = 0) > 0
    z0 = claim.masses[0]
    psi: List[Scalar] = [ez]
    remaining = ez
    for u in range(1, u_max + 1):
        remaining -= exceed[u - 1]
        value = remaining
        for j in range(1, u):
            value += exceed[j] * psi[u - j]
        psi.append(value / z0)
    raw = tuple(1 - v for v in psi)
    return SurvivalVector(
        phi=clamp_survival(raw, "homogeneous"),
        raw_phi=raw,
        boundary_index=None,
        residual=0 * ez,
        branch="homogeneous",
        precision=claim.mode,
    )


# --------- profiles and diagnostics ----------

def ultimate_ruin_profile(model: SeasonalModel, u_max: int, opts: Optional[SolveOptions] = None) -> Tuple[List[Scalar], Optional[SurvivalVector]]:
    """
    psi(u), u = 0..u_max, for any net profit class: 1 when ruin is certain,
    the point-mass profile at the critical degenerate patterns, otherwise the
    branch solver's answer (returned alongside).
    """
    verdict = classify_net_profit(model)
    if not verdict.subcritical:
        one = Fraction(1) if model.mode == EXACT else 1.0
        return [one * v for v in verdict.psi_profile(u_max)], None
    opts = opts or SolveOptions.from_config(u_max=u_max)
    if opts.u_max != u_max:
        opts = replace(opts, u_max=u_max)
    survival = ultimate_branch(model, opts)
    return list(survival.psi), survival


@dataclass(frozen=True)
class ResidualReport:
    first_identity: float
    second_identity: float
    monotone: bool
    far_field: float

    def within(self, identity_tol: float = 1e-9, far_tol: float = 1e-6) -> bool:
        return (
            self.first_identity <= identity_tol
            and self.second_identity <= identity_tol
            and self.monotone
            and self.far_field <= far_tol
        )


def identity_residuals(model: SeasonalModel, survival: SurvivalVector) -> ResidualReport:
    """Check a solved vector against both cycle identities."""
    terms = SeasonTerms.from_model(model, arithmetic_for(model.mode))
    zero = terms.zero
    phi = [terms.scalar(v) for v in survival.raw_phi]
    b0, c0, c1 = terms.get("b", 0), terms.get("c", 0), terms.get("c", 1)

    first = abs(terms.drift - (phi[0] + b0 * c0 * phi[2] + b0 * c1 * phi[1] + c0 * phi[1]))
    second = zero
    for u in range(0, len(phi) - 3):
        rhs = sum((terms.get("s", u + 2 - k) * phi[k + 1] for k in range(u + 3)), zero)
        rhs -= terms.get("a", u + 1) * b0 * c0 * phi[2]
        rhs -= terms.get("a", u + 1) * b0 * c1 * phi[1]
        rhs -= c0 * phi[1] * terms.get("ab", u + 2)
        second = max(second, abs(phi[u] - rhs))

    slack = 0 if model.mode == EXACT else 1e-9
    monotone = all(phi[u + 1] >= phi[u] - slack for u in range(len(phi) - 1))
    return ResidualReport(
        first_identity=float(first),
        second_identity=float(second),
        monotone=monotone,
        far_field=float(survival.residual),
    )
