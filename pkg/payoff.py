"""
Payoff functions of the staying subgame.

The retailer (r) sells at cost c_r and collects a fraction alpha of the
independent seller's revenue. The seller (s) sells at cost c_s and keeps
1 - alpha of its revenue. The lower price captures all demand; on a tie the
retailer serves beta of it.
"""
import numpy as np

from constants import DEFAULT_BETA
from demand import LinearDemand
from errors import InvalidCosts, InvalidParams


class GameParams:
    """
    Parameters of one staying subgame.

    Args:
        c_r (float): Retailer's unit cost, in (0, 1).
        c_s (float): Seller's unit cost, in (0, c_r).
        alpha (float): Referral fee, in (0, 1).
        beta (float): Retailer's share of demand on a tie, in [0, 1].
        curve (DemandCurve, optional): Normalized demand (linear by default).

    Raises:
        InvalidCosts: If 0 < c_s < c_r < 1 fails.
        InvalidParams: If alpha or beta is out of range.
    """
    __slots__ = ('c_r', 'c_s', 'alpha', 'beta', 'curve')

    def __init__(self, c_r, c_s, alpha, beta=DEFAULT_BETA, curve=None):
        check_costs(c_r, c_s)
        if not 0.0 < alpha < 1.0:
            raise InvalidParams(f"0 < alpha < 1 violated (alpha={alpha}).")
        if not 0.0 <= beta <= 1.0:
            raise InvalidParams(f"0 <= beta <= 1 violated (beta={beta}).")
        self.c_r = float(c_r)
        self.c_s = float(c_s)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.curve = curve if curve is not None else LinearDemand()

    def with_alpha(self, alpha):
        """Same costs, tie split and curve with a different fee."""
        return GameParams(self.c_r, self.c_s, alpha, self.beta, self.curve)

    def with_beta(self, beta):
        return GameParams(self.c_r, self.c_s, self.alpha, beta, self.curve)

    def __repr__(self):
        return (f"GameParams(c_r={self.c_r}, c_s={self.c_s}, alpha={self.alpha}, "
                f"beta={self.beta}, curve={self.curve!r})")


def check_costs(c_r, c_s):
    """Raises InvalidCosts unless 0 < c_s < c_r < 1."""
    if not 0.0 < c_s:
        raise InvalidCosts(f"c_s > 0 violated (c_s={c_s}).")
    if not c_s < c_r:
        raise InvalidCosts(f"c_s < c_r violated (c_s={c_s}, c_r={c_r}).")
    if not c_r < 1.0:
        raise InvalidCosts(f"c_r < 1 violated (c_r={c_r}).")


def _scalar_or_array(value, p):
    return float(value) if np.ndim(p) == 0 else value


def pi_rr(params, p):
    """Retailer's payoff when it fulfills all demand at p: (p - c_r) q(p)."""
    q = params.curve.quantity(p)
    return _scalar_or_array((np.asarray(p, dtype=float) - params.c_r) * q, p)


def pi_rs(params, p):
    """Retailer's referral payoff when the seller fulfills all demand at p: alpha p q(p)."""
    q = params.curve.quantity(p)
    return _scalar_or_array(params.alpha * np.asarray(p, dtype=float) * q, p)


def pi_ss(params, p):
    """Seller's payoff when it fulfills all demand at p: ((1 - alpha) p - c_s) q(p)."""
    q = params.curve.quantity(p)
    return _scalar_or_array(((1.0 - params.alpha) * np.asarray(p, dtype=float) - params.c_s) * q, p)


def seller_margin_payoff(curve, alpha, c_s, p):
    """
    ((1 - alpha) p - c_s) q(p) for any real fee, including the negative and
    zero fees used by threshold and bound computations.
    """
    return ((1.0 - alpha) * p - c_s) * curve.quantity(p)


def joint_payoffs(params, p_r, p_s, beta=None):
    """
    Payoffs of both players for a price profile (scalar or broadcastable arrays).

    Args:
        params (GameParams): Game parameters.
        p_r: Retailer's price(s) in [0, 1].
        p_s: Seller's price(s) in [0, 1].
        beta (float, optional): Tie split overriding params.beta; 0 means the
            seller serves a tie, 1 the retailer.

    Returns:
        tuple: (retailer payoff, seller payoff).
    """
    beta = params.beta if beta is None else beta
    p_r_arr = np.asarray(p_r, dtype=float)
    p_s_arr = np.asarray(p_s, dtype=float)

    rr = pi_rr(params, p_r_arr)
    rs = pi_rs(params, p_s_arr)
    ss = pi_ss(params, p_s_arr)

    retailer_low = p_r_arr < p_s_arr
    tie = p_r_arr == p_s_arr

    tie_r = beta * rr + (1.0 - beta) * rs
    tie_s = (1.0 - beta) * ss
    retailer = np.where(retailer_low, rr, np.where(tie, tie_r, rs))
    seller = np.where(retailer_low, 0.0, np.where(tie, tie_s, ss))

    if np.ndim(retailer) == 0:
        return float(retailer), float(seller)
    return retailer, seller
