"""
Key prices of the staying subgame for fixed parameters.

Every optimal price is an argmax of (p - k) q(p) for some effective cost k:
k = c_r for the retailer, k = c_s / (1 - alpha) for the seller and k = 0 for
the revenue peak. Linear demand has closed forms; other curves are solved by
bisection on the sign of the first-order condition, which is decreasing
because q is decreasing and concave.
"""
import logging
import math
from collections import namedtuple

from constants import ROOT_XTOL
from numerics import bracketed_root
from payoff import pi_rr, pi_rs

logger = logging.getLogger(__name__)

KeyPrices = namedtuple('KeyPrices', ['p_rstar', 'p_sstar', 'p_tilde', 'p_rind', 'p_sind', 'p_dagger'])


def optimal_price(curve, effective_cost):
    """
    Maximizer of (p - k) q(p) on [0, 1].

    Args:
        curve (DemandCurve): Normalized demand.
        effective_cost (float): k; values of 1 or more return 1.

    Returns:
        float: The unique optimal price.
    """
    k = float(effective_cost)
    if k >= 1.0:
        return 1.0
    if curve.kind == 'linear':
        return max(0.0, (1.0 + k) / 2.0)

    def foc(p):
        return curve.quantity(p) + (p - k) * curve.slope(p)

    lo = min(max(k, 0.0), 1.0)
    if foc(1.0) >= 0.0:
        return 1.0
    return bracketed_root(foc, lo, 1.0, xtol=ROOT_XTOL)


def retailer_opt_price(params):
    """p_r*: the retailer's optimal price when it fulfills all demand."""
    return optimal_price(params.curve, params.c_r)


def seller_opt_price(params):
    """p_s*: the seller's optimal price; 1 once alpha >= 1 - c_s."""
    return seller_opt_price_at(params.curve, params.c_s, params.alpha)


def seller_opt_price_at(curve, c_s, alpha):
    """p_s* for an arbitrary real fee alpha < 1."""
    return optimal_price(curve, c_s / (1.0 - alpha))


def revenue_peak_price(curve):
    """p~: the maximizer of revenue p q(p)."""
    return optimal_price(curve, 0.0)


def indifference_prices(params):
    """
    (p_rind, p_sind) = (c_r, c_s) / (1 - alpha), returned unclamped.
    """
    return params.c_r / (1.0 - params.alpha), params.c_s / (1.0 - params.alpha)


def p_dagger(params, p_rstar=None):
    """
    p+: the largest price at which the referral payoff equals the retailer's
    best standalone payoff, pi_rs(p+) = pi_rr(p_r*).

    Returns:
        float or None: None when even the revenue peak cannot match pi_rr(p_r*).
    """
    p_rstar = retailer_opt_price(params) if p_rstar is None else p_rstar
    target = pi_rr(params, p_rstar)
    p_tilde = revenue_peak_price(params.curve)
    if pi_rs(params, p_tilde) < target:
        return None
    if params.curve.kind == 'linear':
        return (1.0 + math.sqrt(max(0.0, 1.0 - 4.0 * target / params.alpha))) / 2.0
    # pi_rs decreases on [p~, 1] and vanishes at 1
    return bracketed_root(lambda p: pi_rs(params, p) - target, p_tilde, 1.0)


def key_prices(params):
    """Computes all key prices for one parameter set."""
    p_rstar = retailer_opt_price(params)
    p_rind, p_sind = indifference_prices(params)
    prices = KeyPrices(
        p_rstar=p_rstar,
        p_sstar=seller_opt_price(params),
        p_tilde=revenue_peak_price(params.curve),
        p_rind=p_rind,
        p_sind=p_sind,
        p_dagger=p_dagger(params, p_rstar),
    )
    logger.debug("Key prices for %r: %s", params, prices)
    return prices
