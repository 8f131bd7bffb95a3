# tests/test_arbitration.py

import numpy as np
import pytest

from analysis.linear_forms import SolveOptions
from services.arbitration_service import CellVerdict, arbitrate
from services.monte_carlo_service import McEstimate
from tests.conftest import branch_model


def flagged_model(branch, seed=5):
    rng = np.random.default_rng(seed)
    while True:
        model = branch_model(rng, branch)
        if model.mean_s <= 2.6:
            return model


def test_unflagged_branch_agrees_everywhere(first_model):
    report = arbitrate(first_model, u_values=(0, 1, 3), mc_paths=0)
    assert report.branch == 1
    assert not report.flagged
    assert report.supported == "both"
    assert report.consistent
    assert [c.u for c in report.cells] == [0, 1, 3]
    assert all(c.mc is None for c in report.cells)


def test_first_example_with_simulation(first_model):
    report = arbitrate(first_model, u_values=(0, 2), mc_paths=5000, seed=42, mc_horizon=1000, workers=1)
    assert report.consistent
    assert report.cells[0].mc_supports(0.877)


@pytest.mark.parametrize("branch", [2, 4, 6])
def test_flagged_branches_follow_the_generic_solver(branch):
    model = flagged_model(branch)
    report = arbitrate(model, u_values=(0, 1, 2), opts=SolveOptions(), mc_paths=4000, seed=7, mc_horizon=600, workers=1)
    assert report.branch == branch
    assert report.flagged
    assert all(c.derived_agrees for c in report.cells)
    assert report.supported in ("both", "derived")
    assert report.consistent


def test_report_serialises(first_model):
    report = arbitrate(first_model, u_values=(0,), mc_paths=0)
    payload = report.as_dict()
    assert payload["branch_name"]
    assert payload["cells"][0]["mc"] is None
    assert payload["cells"][0]["derived_agrees"] is True
    assert report.describe().startswith("branch 1 ")


def test_mc_support_window():
    estimate = McEstimate(p_hat=0.5, std_err=0.01, n_paths=2500, seed=0, horizon=100)
    cell = CellVerdict(u=0, printed=None, derived=0.5, generic=0.5, mc=estimate)
    assert cell.mc_supports(0.5)
    # proxy sits below the ultimate value, so the window leans upward
    assert cell.mc_supports(0.5 + 0.04 + 0.004)
    assert not cell.mc_supports(0.5 - 0.041)
    assert not cell.mc_supports(0.5 + 0.046)
    assert cell.mc_supports(None) is None
    assert cell.printed_agrees is None
