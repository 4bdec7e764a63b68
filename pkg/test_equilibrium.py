import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equilibrium import (RETAILER, SELLER, RetailerFixedSellerAbove, SellerFixedRetailerAbove,
                         SharedSellerInterval, admissible_set, admissible_strategies, analyse,
                         collapse_outcomes, derivation_mismatches, derived_outcomes, is_nash,
                         merge_outcome_rows, nash_set, outcome_label, pareto_refine, refined_outcomes)
from fees import threshold_fees
from payoff import GameParams


def _only(outcomes):
    assert len(outcomes) == 1
    return outcomes[0]


# --- Refined outcomes on the running example (case i) ---

def test_low_fee_seller_at_retailer_indifference(params_at):
    o = _only(refined_outcomes(params_at(0.1)))
    assert (o.fulfiller, o.label) == (SELLER, 'prind_s')
    assert o.price_lo == pytest.approx(0.6 / 0.9)
    assert o.price_hi == o.price_lo


def test_seller_optimum_region(params_at):
    o = _only(refined_outcomes(params_at(0.3)))
    assert o.label == 'psstar_s'
    assert o.price_lo == pytest.approx((1 + 0.4 / 0.7) / 2)


def test_continuum_bounded_by_seller_optimum(params_at):
    o = _only(refined_outcomes(params_at(0.45)))
    assert o.label == 'continuum_s'
    assert o.price_lo == pytest.approx(0.8)
    assert o.price_hi == pytest.approx((1 + 0.4 / 0.55) / 2)


def test_continuum_bounded_by_p_dagger(params_at):
    o = _only(refined_outcomes(params_at(0.55)))
    assert o.label == 'continuum_s'
    assert o.price_lo == pytest.approx(0.4 / 0.45)
    assert o.price_hi == pytest.approx((1 + np.sqrt(1 - 4 * 0.04 / 0.55)) / 2)


def test_high_fee_retailer_fulfills(params_at):
    o = _only(refined_outcomes(params_at(0.6)))
    assert (o.fulfiller, o.label, o.price_lo) == (RETAILER, 'prstar_r', pytest.approx(0.8))


def test_boundary_fee_returns_both_rows(params_at):
    rows = refined_outcomes(params_at(0.2))
    assert [o.label for o in rows] == ['prind_s', 'psstar_s']
    # both rows name the same price on the boundary
    assert rows[0].price_lo == pytest.approx(0.75)
    assert rows[1].price_lo == pytest.approx(0.75)


# --- Case ii ---

def test_case_ii_has_no_seller_optimum_row(params_at):
    labels = {outcome_label(params_at(a, c_s=0.5)) for a in np.linspace(0.01, 0.99, 99)}
    assert 'psstar_s' not in labels
    assert labels == {'prind_s', 'continuum_s', 'prstar_r'}


def test_case_ii_continuum(params_at):
    o = _only(refined_outcomes(params_at(0.3, c_s=0.5)))
    assert o.label == 'continuum_s'
    assert o.price_lo == pytest.approx(0.8)
    assert o.price_hi == pytest.approx((1 + np.sqrt(1 - 4 * 0.04 / 0.3)) / 2)


def test_negative_alpha_sstar_skips_rind_regime(params_at):
    labels = {outcome_label(params_at(a, c_r=0.9, c_s=0.5)) for a in np.linspace(0.01, 0.99, 50)}
    assert 'prind_s' not in labels


# --- Nash families and refinements ---

def test_nash_families_inside_continuum(params_at):
    params = params_at(0.45)
    families = nash_set(params)
    assert SellerFixedRetailerAbove(pytest.approx((1 + 0.4 / 0.55) / 2), pytest.approx((1 + 0.4 / 0.55) / 2), 1.0) in families
    shared = [f for f in families if isinstance(f, SharedSellerInterval)]
    assert len(shared) == 1
    assert shared[0].lo == pytest.approx(0.4 / 0.55)
    assert not any(isinstance(f, RetailerFixedSellerAbove) for f in families)


def test_pareto_removes_retailer_family(params_at):
    params = params_at(0.55)
    ctx = analyse(params)
    families = nash_set(params, ctx)
    assert any(isinstance(f, RetailerFixedSellerAbove) for f in families)

    admissible = admissible_set(params, ctx)
    retailer = [f for f in admissible if isinstance(f, RetailerFixedSellerAbove)]
    assert retailer and retailer[0].status == 'admissible'
    assert retailer[0].seller_hi == pytest.approx((1 + 0.4 / 0.45) / 2)

    refined = pareto_refine(params, admissible, ctx)
    assert all(isinstance(f, SharedSellerInterval) for f in refined)
    assert all(f.status == 'admissible_pareto' for f in refined)


def test_admissible_strategies_above_seller_breakeven(params_at):
    (r_lo, r_hi), (s_lo, s_hi) = admissible_strategies(params_at(0.5))
    assert (r_lo, r_hi) == (pytest.approx(0.8), 1.0)
    assert (s_lo, s_hi) == (pytest.approx(0.8), pytest.approx(0.9))
    # every price below 1 loses money for the seller
    assert admissible_strategies(params_at(0.7))[1] == (1.0, 1.0)


def test_collapse_merges_touching_intervals():
    families = [SharedSellerInterval(0.7, 0.8), SellerFixedRetailerAbove(0.8, 0.8, 1.0),
                RetailerFixedSellerAbove(0.8, 0.9, 1.0)]
    outcomes = collapse_outcomes(families)
    assert [(o.price_lo, o.price_hi, o.fulfiller) for o in outcomes] == [(0.7, 0.8, SELLER), (0.8, 0.8, RETAILER)]


def test_merge_outcome_rows_joins_boundary_rows(params_at):
    rows = refined_outcomes(params_at(0.2))
    merged = merge_outcome_rows(rows)
    assert len(rows) == 2
    assert len(merged) == 1
    assert (merged[0].price_lo, merged[0].price_hi) == (pytest.approx(0.75), pytest.approx(0.75))
    assert merged[0].label is None


def test_derived_outcomes_drop_dominated_retailer_family(params_at):
    derived = derived_outcomes(params_at(0.55))
    assert [o.fulfiller for o in derived] == [SELLER]


@pytest.mark.parametrize("threshold", ['alpha_sstar', 'alpha_opt', 'alpha_rstar', 'alpha_sdagger'])
def test_outcome_rows_match_refined_families_on_thresholds(linear, params_at, threshold):
    alpha = getattr(threshold_fees(linear, 0.6, 0.4), threshold)
    assert derivation_mismatches(params_at(alpha)) == []


def test_derivation_mismatch_reported_for_wrong_cost_case(params_at):
    params = params_at(0.3)
    # case-ii rows start the continuum at alpha_rdagger = 0.25, the families still put the seller at p_s*
    problems = derivation_mismatches(params, analyse(params)._replace(case='ii'))
    assert len(problems) == 1
    assert "differs from refined family [0.785714, 0.785714]" in problems[0]


# --- Nash checks ---

def test_is_nash_on_family_members(params_at):
    params = params_at(0.5)
    assert is_nash(params, 0.85, 0.85).is_nash
    assert is_nash(params, 0.8, 0.95).is_nash
    assert is_nash(params, 0.95, 0.9).is_nash


def test_is_nash_rejects_loss_making_tie(params_at):
    params = params_at(0.5)
    check = is_nash(params, 0.4, 0.4)
    assert not check.is_nash
    assert any(v.startswith('IV') for v in check.violations)


def test_is_nash_rejects_top_price_tie(params_at):
    check = is_nash(params_at(0.1), 1.0, 1.0)
    assert not check.is_nash
    assert any(v.startswith('I:') for v in check.violations)


def test_is_nash_rejects_unknown_fulfiller(params_at):
    with pytest.raises(ValueError, match="Unknown tie fulfiller"):
        is_nash(params_at(0.5), 0.85, 0.85, fulfiller='nobody')


@given(c_r=st.floats(0.1, 0.9), frac=st.floats(0.1, 0.9), alpha=st.floats(0.02, 0.98),
       t=st.floats(0.05, 0.95))
@settings(max_examples=150, deadline=None)
def test_family_members_pass_nash_check(c_r, frac, alpha, t):
    params = GameParams(c_r, c_r * frac, alpha)
    for family in nash_set(params):
        if isinstance(family, SharedSellerInterval):
            p = family.lo + t * (family.hi - family.lo)
            assert is_nash(params, p, p).is_nash
        elif isinstance(family, RetailerFixedSellerAbove):
            p = family.seller_lo + t * (family.seller_hi - family.seller_lo)
            if p > family.p_r:
                assert is_nash(params, family.p_r, p).is_nash
        else:
            p = family.retailer_lo + t * (family.retailer_hi - family.retailer_lo)
            if p > family.p_s:
                assert is_nash(params, p, family.p_s).is_nash


@given(c_r=st.floats(0.1, 0.9), frac=st.floats(0.1, 0.9), alpha=st.floats(0.02, 0.98))
@settings(max_examples=150, deadline=None)
def test_refined_outcomes_always_exist(c_r, frac, alpha):
    rows = refined_outcomes(GameParams(c_r, c_r * frac, alpha))
    assert 1 <= len(rows) <= 2
    for o in rows:
        assert 0.0 <= o.price_lo <= o.price_hi <= 1.0 + 1e-12


@given(c_r=st.floats(0.1, 0.9), frac=st.floats(0.1, 0.9), alpha=st.floats(0.02, 0.98))
@settings(max_examples=200, deadline=None)
def test_outcome_rows_match_refined_families(c_r, frac, alpha):
    assert derivation_mismatches(GameParams(c_r, c_r * frac, alpha)) == []
