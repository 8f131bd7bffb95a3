# tests/test_ultimate.py

from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from analysis.finite_time import finite_time_ruin, identical_seasons
from analysis.linear_forms import PrecisionShortfall, SolveOptions, SurvivalVector, _solve_pair, solve_with_escalation
from analysis.net_profit import classify_net_profit
from analysis.pmf_core import pmf_from_weights, seasonal_model
from analysis.scalars import EXACT, Arithmetic
from analysis.ultimate import (
    PRINTED_DIFFERS,
    branch_id,
    coefficient_rows,
    homogeneous_ultimate,
    identity_residuals,
    ultimate_branch,
    ultimate_generic,
)
from tests.conftest import BRANCH_PATTERNS, branch_model
from utils.errors import IllConditionedBoundary, NetProfitViolated, NoBranchMatched, NotSubcritical, PrecisionExhausted

OPTS = SolveOptions(u_max=30)


def branch_corpus(per_branch=5, seed=2024):
    rng = np.random.default_rng(seed)
    return [(branch, branch_model(rng, branch)) for branch in BRANCH_PATTERNS for _ in range(per_branch)]


CORPUS = branch_corpus()


# --------- dispatch ----------

@pytest.mark.parametrize("branch, model", CORPUS)
def test_generated_models_hit_their_branch(branch, model):
    assert branch_id(model) == branch


@pytest.mark.parametrize("seed", [5, 7, 11])
def test_branch_factory_only_yields_solvable_draws(seed):
    rng = np.random.default_rng(seed)
    for branch in BRANCH_PATTERNS:
        model = branch_model(rng, branch)
        assert classify_net_profit(model).subcritical
        assert len(ultimate_branch(model, SolveOptions(u_max=2)).psi) == 3


def test_first_example_is_branch_one(first_model):
    assert branch_id(first_model) == 1


def test_all_zero_atoms_have_no_branch():
    # E S >= 3 here, so the solvers refuse before dispatch
    model = seasonal_model([pmf_from_weights([0, 1])] * 3)
    with pytest.raises(NoBranchMatched):
        branch_id(model)


# --------- reference values ----------

def test_first_example_ultimate_row(first_model):
    psi = ultimate_branch(first_model, SolveOptions(u_max=20)).psi
    assert psi[0] == pytest.approx(0.877, abs=5e-4)
    assert psi[1] == pytest.approx(0.722, abs=5e-4)
    assert psi[20] == pytest.approx(0.003, abs=5e-4)


def test_poisson_ultimate_row(poisson_model):
    psi = ultimate_branch(poisson_model, SolveOptions(u_max=10)).psi
    assert psi[0] == pytest.approx(0.609, abs=5e-4)
    assert psi[10] == pytest.approx(0.0002, abs=5e-4)


def test_geometric_ultimate_row(geometric_model):
    psi = ultimate_branch(geometric_model, SolveOptions(u_max=20)).psi
    assert psi[0] == pytest.approx(0.927, abs=5e-4)
    assert psi[20] == pytest.approx(0.385, abs=5e-4)


def test_no_claims_means_no_ruin(zero_claims_model):
    for solve in (ultimate_branch, ultimate_generic):
        phi = solve(zero_claims_model, SolveOptions(u_max=10)).phi
        assert phi == pytest.approx([1.0] * 11, abs=1e-12)


def test_row_two_of_lead_zero_case(first_model_exact):
    a, b, c = first_model_exact.seasons
    b0, c0, c1 = b.masses[0], c.masses[0], c.masses[1]
    for solver in ("generic", "branch"):
        row = coefficient_rows(first_model_exact, 3, solver=solver)
        assert (row[0].alpha, row[0].beta, row[0].gamma) == (1, 0, 0)
        assert (row[1].alpha, row[1].beta, row[1].gamma) == (0, 1, 0)
        assert row[2].alpha == -1 / (b0 * c0)
        assert row[2].beta == -c1 / c0 - 1 / b0
        assert row[2].gamma == 1 / (b0 * c0)


def test_generic_and_branch_rows_coincide_for_lead_zero(first_model_exact):
    generic = coefficient_rows(first_model_exact, 12, solver="generic")
    branch = coefficient_rows(first_model_exact, 12, solver="branch")
    assert generic == branch


# --------- cross-solver equivalence ----------

@pytest.mark.parametrize("branch, model", CORPUS)
def test_branch_and_generic_agree(branch, model):
    derived = ultimate_branch(model, OPTS)
    generic = ultimate_generic(model, OPTS)
    assert derived.branch == str(branch)
    assert np.max(np.abs(np.array(derived.psi, dtype=float) - np.array(generic.psi, dtype=float))) <= 1e-9


@pytest.mark.parametrize("branch, model", [(b, m) for b, m in CORPUS if b not in PRINTED_DIFFERS][::2])
def test_printed_flag_changes_nothing_outside_flagged_cases(branch, model):
    plain = ultimate_branch(model, OPTS)
    printed = ultimate_branch(model, replace(OPTS, printed_formulas=True))
    assert printed.psi == pytest.approx(plain.psi, abs=1e-12)


# near-critical draws decay too slowly for a tight residual at the default boundary
@pytest.mark.parametrize("branch, model", [(b, m) for b, m in CORPUS if m.mean_s <= 2.8][::2])
def test_identity_residuals(branch, model):
    survival = ultimate_branch(model, OPTS)
    report = identity_residuals(model, survival)
    assert report.first_identity <= 1e-9
    assert report.second_identity <= 1e-9
    assert report.monotone
    assert report.far_field <= 1e-6
    assert report.within()


def test_exact_mode_solve(first_model_exact):
    survival = ultimate_generic(first_model_exact, SolveOptions(u_max=5, boundary_index=250))
    assert survival.precision == EXACT
    assert all(isinstance(v, Fraction) for v in survival.phi)
    assert float(survival.psi[0]) == pytest.approx(0.877, abs=5e-4)


def test_adaptive_exact_solve(first_model_exact, first_model):
    survival = ultimate_branch(first_model_exact, SolveOptions(u_max=3))
    assert survival.precision == EXACT
    assert all(isinstance(v, Fraction) for v in survival.phi)
    floats = ultimate_branch(first_model, SolveOptions(u_max=3)).psi
    assert [float(v) for v in survival.psi] == pytest.approx(floats, abs=1e-9)


def test_boundary_pair_with_huge_rationals():
    big = Fraction(10**400, 3)
    phi0, phi1 = _solve_pair((big, Fraction(1), big + 1), (Fraction(1), big, big + 1))
    assert phi0 == phi1 == 1
    with pytest.raises(IllConditionedBoundary):
        _solve_pair((big, big, Fraction(1)), (big, big, Fraction(2)))


def test_fixed_boundary_index(first_model):
    survival = ultimate_branch(first_model, SolveOptions(u_max=5, boundary_index=300))
    assert survival.boundary_index == 300
    adaptive = ultimate_branch(first_model, SolveOptions(u_max=5))
    assert adaptive.boundary_index >= 250
    assert survival.psi == pytest.approx(adaptive.psi, abs=1e-9)


def test_metadata(first_model):
    meta = ultimate_branch(first_model, SolveOptions(u_max=3)).metadata()
    assert meta["branch"] == "1"
    assert meta["boundary_index"] >= 250
    assert meta["residual"] <= 1e-6
    assert set(meta) == {"branch", "boundary_index", "precision", "escalations", "residual"}


def test_limit_consistency(first_model):
    ultimate = ultimate_branch(first_model, SolveOptions(u_max=10)).psi
    finite = finite_time_ruin(first_model, 10, 200)
    for u in range(11):
        assert finite.at(u, 200) <= ultimate[u] + 1e-9
        assert finite.at(u, 200) == pytest.approx(ultimate[u], abs=0.05)


def test_supercritical_is_refused():
    model = seasonal_model([pmf_from_weights([0, 1, 1])] * 3)
    with pytest.raises(NotSubcritical):
        ultimate_branch(model)
    with pytest.raises(NotSubcritical):
        ultimate_generic(model)


# --------- precision ladder ----------

def test_escalation_restarts_in_extended_precision(first_model):
    seen = []

    def attempt(terms):
        seen.append(terms.arithmetic.label)
        if not terms.arithmetic.extended:
            raise PrecisionShortfall(400, "test row")
        return SurvivalVector(phi=(1.0,), raw_phi=(1.0,), boundary_index=None, residual=0.0, branch="x")

    result = solve_with_escalation(first_model, SolveOptions(), attempt)
    assert seen == ["float", "mp1024"]
    assert result.precision == "mp1024"
    assert result.escalations == 1


def test_escalation_off_raises(first_model):
    def attempt(terms):
        raise PrecisionShortfall(400, "test row")

    with pytest.raises(PrecisionExhausted):
        solve_with_escalation(first_model, SolveOptions(precision_escalation=False), attempt)


def test_escalation_has_a_ceiling(first_model):
    def attempt(terms):
        raise PrecisionShortfall(10 ** 6, "test row")

    with pytest.raises(PrecisionExhausted):
        solve_with_escalation(first_model, SolveOptions(), attempt)


def test_arithmetic_ladder():
    assert Arithmetic("float").escalated(None).bits == 256
    assert Arithmetic("mp", 256).escalated(None).bits == 512
    assert Arithmetic("float").escalated(700).bits == 1024
    assert Arithmetic("float").magnitude_bits(1e250) is not None
    assert Arithmetic("float").magnitude_bits(1e10) is None


def test_small_leading_atom_still_solves():
    # s0 = 1e-6 makes the lead-zero recursion grow fast
    seasons = [pmf_from_weights([1, 99]), pmf_from_weights([1, 99]), pmf_from_weights([1, 99])]
    model = seasonal_model(seasons)
    derived = ultimate_branch(model, SolveOptions(u_max=10))
    generic = ultimate_generic(model, SolveOptions(u_max=10))
    assert np.allclose(derived.psi, generic.psi, atol=1e-9)


# --------- homogeneous model ----------

def test_homogeneous_first_value():
    survival = homogeneous_ultimate(pmf_from_weights([0.5, 0.25, 0.25]), 5)
    assert survival.psi[0] == pytest.approx(0.75)


def test_homogeneous_no_claims():
    assert homogeneous_ultimate(pmf_from_weights([1]), 4).psi == pytest.approx([0.0] * 5)


def test_homogeneous_requires_net_profit():
    with pytest.raises(NetProfitViolated):
        homogeneous_ultimate(pmf_from_weights([1, 0, 1]), 3)


def test_identical_seasons_match_homogeneous_ultimate():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 10:
        weights = [int(w) for w in rng.integers(1, 8, size=int(rng.integers(2, 5)))]
        weights[0] += int(rng.integers(2, 10))
        claim = pmf_from_weights(weights)
        if not sum(k * m for k, m in enumerate(claim.masses)) < 1:
            continue
        single = homogeneous_ultimate(claim, 50).psi
        seasonal = ultimate_branch(identical_seasons(claim), SolveOptions(u_max=50)).psi
        assert np.max(np.abs(np.array(single) - np.array(seasonal, dtype=float))) <= 1e-9
        checked += 1


def test_homogeneous_exact():
    claim = pmf_from_weights(["0.5", "0.25", "0.25"], EXACT)
    psi = homogeneous_ultimate(claim, 3).psi
    assert psi[0] == Fraction(3, 4)


def test_homogeneous_keeps_the_zero_claim_term():
    claim = pmf_from_weights([5, 3, 2, 1], EXACT)
    psi = homogeneous_ultimate(claim, 3).psi
    assert psi[:3] == (Fraction(10, 11), Fraction(4, 5), Fraction(17, 25))
    masses = claim.masses
    # one-step renewal at u = 1
    assert psi[1] == masses[2] + masses[3] + masses[0] * psi[2] + masses[1] * psi[1]


def test_homogeneous_matches_long_horizon():
    claim = pmf_from_weights([5, 3, 2, 1])
    psi = homogeneous_ultimate(claim, 4).psi
    finite = finite_time_ruin(identical_seasons(claim, period=1), 4, 3000)
    for u in range(5):
        assert finite.at(u, 3000) == pytest.approx(psi[u], abs=1e-6)
