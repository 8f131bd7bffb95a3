# tests/test_monte_carlo.py

import math

import pytest

import config
from analysis.finite_time import finite_time_ruin
from analysis.pmf_core import pmf_from_weights, seasonal_model
from commands.mc_check import check_grid
from services.monte_carlo_service import (
    ALGORITHM,
    McEstimate,
    mc_finite_time,
    mc_finite_time_horizons,
    mc_ultimate_proxy,
)
from tests.conftest import example_model
from utils.errors import InvalidParameter, NotSubcritical, WrongPeriod


def test_no_claims_never_ruins(zero_claims_model):
    estimate = mc_finite_time(zero_claims_model, 0, 50, n_paths=2000, seed=1, workers=1)
    assert estimate.p_hat == 0
    assert estimate.std_err == 0


def test_same_seed_same_estimate(first_model):
    one = mc_finite_time(first_model, 1, 10, n_paths=5000, seed=7, workers=1)
    two = mc_finite_time(first_model, 1, 10, n_paths=5000, seed=7, workers=1)
    assert one == two
    assert one.algorithm == ALGORITHM


def test_worker_count_does_not_change_estimate(first_model, monkeypatch):
    monkeypatch.setattr(config, "MC_BLOCK", 1000)
    serial = mc_finite_time(first_model, 0, 10, n_paths=4500, seed=3, workers=1)
    parallel = mc_finite_time(first_model, 0, 10, n_paths=4500, seed=3, workers=2)
    assert serial.p_hat == parallel.p_hat


def test_standard_error_formula(first_model):
    estimate = mc_finite_time(first_model, 0, 5, n_paths=4000, seed=11, workers=1)
    assert estimate.std_err == pytest.approx(math.sqrt(estimate.p_hat * (1 - estimate.p_hat) / 4000))


def test_estimate_close_to_programme(first_model):
    estimate = mc_finite_time(first_model, 0, 10, n_paths=20000, seed=42, workers=1)
    assert abs(estimate.z_score(0.802)) <= 4


def test_horizons_from_one_walk(first_model):
    horizons = (1, 2, 5)
    estimates = mc_finite_time_horizons(first_model, 0, horizons, n_paths=5000, seed=5, workers=1)
    assert [e.horizon for e in estimates] == list(horizons)
    values = [e.p_hat for e in estimates]
    assert values == sorted(values)
    # the last horizon repeats a direct run with the same seed
    assert values[-1] == mc_finite_time(first_model, 0, 5, n_paths=5000, seed=5, workers=1).p_hat


def test_ultimate_proxy_first_example(first_model):
    estimate = mc_ultimate_proxy(first_model, 0, n_paths=20000, seed=42, workers=1)
    assert -4 * estimate.std_err <= 0.877 - estimate.p_hat <= 4 * estimate.std_err + 0.005


def test_ultimate_proxy_far_surplus(first_model):
    estimate = mc_ultimate_proxy(first_model, 500, n_paths=200, seed=1, horizon=100, workers=1)
    assert estimate.p_hat == 0


def test_ultimate_proxy_refuses_supercritical():
    model = seasonal_model([pmf_from_weights([0, 1, 1])] * 3)
    with pytest.raises(NotSubcritical):
        mc_ultimate_proxy(model, 0, n_paths=10, seed=1)


def test_ultimate_proxy_follows_the_classifier():
    nearly_critical = seasonal_model([pmf_from_weights([1e-14, 1])] * 3)
    assert nearly_critical.mean_s < 3
    with pytest.raises(NotSubcritical):
        mc_ultimate_proxy(nearly_critical, 0, n_paths=10, seed=1)
    with pytest.raises(WrongPeriod):
        mc_ultimate_proxy(seasonal_model([pmf_from_weights([3, 1])] * 2), 0, n_paths=10, seed=1)


def test_bad_path_count(first_model):
    with pytest.raises(InvalidParameter):
        mc_finite_time(first_model, 0, 5, n_paths=0, seed=1)


def test_single_path_z_scores_stay_small():
    for ruined, expected in [(0, 0.0), (1, 0.0), (1, 0.5), (0, 1.0)]:
        estimate = McEstimate.from_counts(ruined, 1, seed=0, horizon=1)
        assert abs(estimate.z_score(expected)) <= 4


def test_rare_cell_z_score():
    estimate = McEstimate.from_counts(1, 10 ** 6, seed=0, horizon=20)
    assert abs(estimate.z_score(1e-7)) <= 4


@pytest.mark.slow
@pytest.mark.parametrize("name, u, horizon, expected", [("first", 0, 10, 0.802), ("geometric", 5, 20, 0.298)])
def test_million_paths_match_table(name, u, horizon, expected):
    estimate = mc_finite_time(example_model(name), u, horizon, n_paths=10 ** 6, seed=42)
    assert abs(estimate.p_hat - expected) <= 3 * estimate.std_err + 5e-4


@pytest.mark.slow
def test_poisson_ultimate_proxy():
    estimate = mc_ultimate_proxy(example_model("poisson"), 2, n_paths=10 ** 5, seed=42)
    assert -4 * estimate.std_err <= 0.139 - estimate.p_hat <= 4 * estimate.std_err + 0.005


@pytest.mark.slow
@pytest.mark.parametrize("name", ["first", "poisson", "geometric"])
def test_grid_z_scores(name):
    cells = check_grid(example_model(name), n_paths=10 ** 6, seed=42)
    assert len(cells) == 25
    assert all(abs(c.z) <= 4 for c in cells), [c.describe() for c in cells if abs(c.z) > 4]


def test_grid_against_programme_small(first_model):
    cells = check_grid(first_model, n_paths=5000, seed=9, grid_u=(0, 3), grid_t=(1, 4))
    exact = finite_time_ruin(first_model, 3, 4)
    assert [(c.u, c.horizon) for c in cells] == [(0, 1), (0, 4), (3, 1), (3, 4)]
    assert cells[1].expected == pytest.approx(float(exact.at(0, 4)))
    assert all(c.passed for c in cells)
