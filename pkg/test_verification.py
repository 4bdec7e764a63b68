import numpy as np
import pytest

from demand import LinearDemand
from equilibrium import Outcome, RETAILER, SELLER
from fees import threshold_fees
from numerics import open_unit_grid
from oracle import GridOutcomes, GridSpec
from payoff import GameParams
from verification import compare_outcomes, random_verify, sweep_verify, verify_cell

H = 0.005


def test_compare_outcomes_accepts_nearby_prices():
    analytic = [Outcome(0.8, 0.81, SELLER, 'continuum_s')]
    found = GridOutcomes(np.array([0.795, 0.8, 0.805, 0.81]), np.array([]))
    assert compare_outcomes(analytic, found, H) == []


def test_compare_outcomes_reports_each_kind_of_mismatch():
    analytic = [Outcome(0.8, 0.8, RETAILER, 'prstar_r')]
    problems = compare_outcomes(analytic, GridOutcomes(np.array([0.9]), np.array([])), H)
    assert "missing retailer outcome [0.800000, 0.800000]" in problems
    assert "spurious seller grid outcome at 0.900000" in problems

    far = compare_outcomes(analytic, GridOutcomes(np.array([]), np.array([0.83])), H)
    assert any("no grid equilibrium nearby" in p for p in far)


def test_verify_cell_labels_ambiguity_near_threshold():
    linear = LinearDemand()
    fees = threshold_fees(linear, 0.6, 0.4)
    cell = verify_cell(GameParams(0.6, 0.4, 0.45, curve=linear), fees, GridSpec(201), 0.01)
    assert cell['problems'] == []
    assert not cell['boundary_ambiguous']
    assert cell['kind'] == 'seller_interval'

    near = verify_cell(GameParams(0.6, 0.4, 0.2, curve=linear), fees, GridSpec(201), 0.01)
    assert 'alpha_sstar' in near['near_thresholds']


def test_sweep_agrees_on_running_example():
    report = sweep_verify(0.6, 0.4, LinearDemand(), open_unit_grid(40), GridSpec(201))
    assert report['cells'] == 40
    assert report['disagreements'] == 0, report['failures']
    kinds = [b['to'] for b in report['boundaries']]
    assert kinds[-1] == 'retailer'
    assert report['thresholds']['alpha_rstar'] == pytest.approx(0.5)


def test_sweep_detects_shifted_thresholds():
    report = sweep_verify(0.6, 0.4, LinearDemand(), open_unit_grid(100), GridSpec(201), perturb_fee=0.1)
    assert report['disagreements'] >= 1


def test_random_verify_is_deterministic():
    first = random_verify(3, LinearDemand(), GridSpec(101), seed=7)
    second = random_verify(3, LinearDemand(), GridSpec(101), seed=7)
    assert first == second
    assert (first['seed'], first['draws'], first['grid_n']) == (7, 3, 101)
