import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from payoff import GameParams, pi_rr, pi_rs
from prices import (indifference_prices, key_prices, optimal_price, p_dagger, retailer_opt_price,
                    revenue_peak_price, seller_opt_price, seller_opt_price_at)


def test_running_example_key_prices(params_at):
    kp = key_prices(params_at(0.5))
    assert kp.p_rstar == pytest.approx(0.8, abs=1e-12)
    assert kp.p_sstar == pytest.approx(0.9, abs=1e-12)
    assert kp.p_tilde == pytest.approx(0.5, abs=1e-12)
    assert kp.p_rind == pytest.approx(1.2)
    assert kp.p_sind == pytest.approx(0.8)
    assert kp.p_dagger == pytest.approx((1 + math.sqrt(0.68)) / 2, abs=1e-12)


def test_indifference_prices_are_unclamped(params_at):
    p_rind, p_sind = indifference_prices(params_at(0.7))
    assert p_rind == pytest.approx(2.0)
    assert p_sind == pytest.approx(4.0 / 3.0)


def test_seller_price_clamps_at_one(params_at):
    assert seller_opt_price(params_at(0.65)) == 1.0
    assert seller_opt_price(params_at(0.8)) == 1.0
    assert seller_opt_price_at(params_at(0.5).curve, 0.4, 0.5) == pytest.approx(0.9)


def test_negative_fee_seller_price(linear):
    # c_s / (1 - alpha) = 0.5 / 1.3
    assert seller_opt_price_at(linear, 0.5, -0.3) == pytest.approx((1 + 0.5 / 1.3) / 2)


def test_p_dagger_absent_when_referral_cannot_match(params_at):
    # alpha * max p q(p) = alpha / 4 < 0.04
    assert p_dagger(params_at(0.1)) is None
    assert key_prices(params_at(0.1)).p_dagger is None


def test_p_dagger_definition(params_at):
    params = params_at(0.45)
    pd_ = p_dagger(params)
    assert pi_rs(params, pd_) == pytest.approx(pi_rr(params, 0.8), abs=1e-12)
    assert pd_ >= revenue_peak_price(params.curve)


def test_tabulated_optimal_price_matches_quadratic(quadratic):
    # argmax (p - k)(1 - p**2) solves 3p^2 - 2kp - 1 = 0
    for k in (0.0, 0.3, 0.6):
        expected = (k + math.sqrt(k * k + 3.0)) / 3.0
        assert optimal_price(quadratic, k) == pytest.approx(expected, abs=2e-3)


def test_tabulated_p_dagger_by_bisection(quadratic):
    params = GameParams(0.6, 0.4, 0.5, curve=quadratic)
    kp = key_prices(params)
    assert kp.p_dagger is not None
    assert pi_rs(params, kp.p_dagger) == pytest.approx(pi_rr(params, kp.p_rstar), abs=1e-9)


def test_optimal_price_of_high_cost(linear):
    assert optimal_price(linear, 1.0) == 1.0
    assert optimal_price(linear, 2.5) == 1.0


@given(c_r=st.floats(0.05, 0.95), frac=st.floats(0.05, 0.95), alpha=st.floats(0.01, 0.99))
@settings(max_examples=100, deadline=None)
def test_optimal_prices_beat_grid(c_r, frac, alpha):
    params = GameParams(c_r, c_r * frac, alpha)
    grid = np.linspace(0.0, 1.0, 10_000)
    p_rstar = retailer_opt_price(params)
    assert np.all(pi_rr(params, p_rstar) >= pi_rr(params, grid) - 1e-12)

    kp = key_prices(params)
    assert kp.p_rind >= kp.p_sind
    if kp.p_dagger is not None:
        assert kp.p_dagger >= kp.p_tilde - 1e-12
