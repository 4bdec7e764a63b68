"""
Threshold fees: the values of alpha at which two key prices swap order.

For fixed costs these partition the fee axis into the equilibrium regimes:

    alpha_rstar    p_sind  = p_r*     1 - c_s / p_r*
    alpha_sstar    p_rind  = p_s*     root of p_rind(a) - p_s*(a)
    alpha_opt      p_s*    = p_r*     1 - c_s / c_r
    alpha_rdagger  p_rind  = p_r*     1 - c_r / p_r*
    alpha_sdagger  largest fee with pi_rs(p_sind) = pi_rr(p_r*)

c_sstar = c_r**2 / p_r* splits cost pairs into case i (c_s <= c_sstar) and
case ii.
"""
import logging
from collections import namedtuple

import numpy as np

from constants import FEE_SCAN_POINTS, ROOT_XTOL, PRICE_TOL
from numerics import bracketed_root
from payoff import check_costs
from prices import optimal_price, seller_opt_price_at

logger = logging.getLogger(__name__)

ThresholdFees = namedtuple('ThresholdFees', ['alpha_rstar', 'alpha_sstar', 'alpha_opt',
                                             'alpha_rdagger', 'alpha_sdagger', 'c_sstar'])


def _alpha_sstar(curve, c_r, c_s):
    """
    Solves p_rind(a) = p_s*(a). The root can be negative, in which case no
    admissible fee has the seller fulfilling at p_rind.
    """
    if curve.kind == 'linear':
        return 1.0 - 2.0 * c_r + c_s

    def gap(a):
        return c_r / (1.0 - a) - seller_opt_price_at(curve, c_s, a)

    grid = np.linspace(0.0, 1.0 - c_s, FEE_SCAN_POINTS, endpoint=False)
    values = np.array([gap(a) for a in grid])
    crossings = np.flatnonzero((values[:-1] < 0) & (values[1:] >= 0))
    if crossings.size:
        i = crossings[0]
        return bracketed_root(gap, grid[i], grid[i + 1], xtol=ROOT_XTOL)
    if values[0] < 0:
        # gap stays negative up to 1 - c_s, where p_rind = c_r / c_s > 1 = p_s*
        return bracketed_root(gap, grid[-1], 1.0 - c_s, xtol=ROOT_XTOL)

    # gap(0) >= 0: walk left; gap tends to -p~ as the fee goes to -infinity
    lo = -1.0
    while gap(lo) >= 0.0:
        lo *= 2.0
        if lo < -1e12:
            raise RuntimeError(f"Could not bracket alpha_sstar for c_r={c_r}, c_s={c_s}.")
    logger.info("alpha_sstar is negative for c_r=%g, c_s=%g; the p_rind regime is empty.", c_r, c_s)
    return bracketed_root(gap, lo, 0.0, xtol=ROOT_XTOL)


def _alpha_sdagger(curve, c_r, c_s, p_rstar, alpha_rstar):
    """
    Largest fee in [alpha_rstar, 1 - c_s] with pi_rs(p_sind(a), a) = pi_rr(p_r*).

    pi_rs(p_sind(a), a) = (p_sind - c_s) q(p_sind) is decreasing on this
    bracket because p_sind(alpha_rstar) = p_r* lies past the revenue peak.
    """
    target = (p_rstar - c_r) * curve.quantity(p_rstar)

    def excess(a):
        p_sind = min(c_s / (1.0 - a), 1.0)
        return (p_sind - c_s) * curve.quantity(p_sind) - target

    return bracketed_root(excess, alpha_rstar, 1.0 - c_s, xtol=ROOT_XTOL)


def threshold_fees(curve, c_r, c_s):
    """
    Computes the threshold fees for one cost pair.

    Args:
        curve (DemandCurve): Normalized demand.
        c_r (float): Retailer cost.
        c_s (float): Seller cost.

    Returns:
        ThresholdFees

    Raises:
        InvalidCosts: If 0 < c_s < c_r < 1 fails.
    """
    check_costs(c_r, c_s)
    p_rstar = optimal_price(curve, c_r)
    alpha_rstar = 1.0 - c_s / p_rstar
    fees = ThresholdFees(
        alpha_rstar=alpha_rstar,
        alpha_sstar=_alpha_sstar(curve, c_r, c_s),
        alpha_opt=1.0 - c_s / c_r,
        alpha_rdagger=1.0 - c_r / p_rstar,
        alpha_sdagger=_alpha_sdagger(curve, c_r, c_s, p_rstar, alpha_rstar),
        c_sstar=c_r ** 2 / p_rstar,
    )
    logger.debug("Threshold fees for c_r=%g, c_s=%g: %s", c_r, c_s, fees)
    return fees


def cost_case(fees, c_s):
    """'i' when c_s <= c_sstar (the seller-optimal region exists), else 'ii'."""
    return 'i' if c_s <= fees.c_sstar + PRICE_TOL else 'ii'


def continuum_start(fees):
    """First fee of the continuum regime, max{alpha_rdagger, alpha_opt}."""
    return max(fees.alpha_rdagger, fees.alpha_opt)


def shifted(fees, offset):
    """Every threshold fee moved by `offset` (fault injection for verification runs)."""
    return fees._replace(alpha_rstar=fees.alpha_rstar + offset,
                         alpha_sstar=fees.alpha_sstar + offset,
                         alpha_opt=fees.alpha_opt + offset,
                         alpha_rdagger=fees.alpha_rdagger + offset,
                         alpha_sdagger=fees.alpha_sdagger + offset)
