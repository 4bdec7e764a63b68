"""
The fee optimization game: the retailer picks a referral fee alpha, then
both players play a refined equilibrium of the staying subgame selected by a
strategy profile rho.

Inside the continuum regime several outcome prices are equilibria; rho picks
one of them for every fee:

    rho_low   max{p_r*, p_sind}    (best case for the retailer)
    rho_high  min{p_s*, p+}        (worst case for the retailer)
    custom    piecewise-linear alpha -> price table, clamped into the interval
"""
import logging
import warnings
from collections import namedtuple

import numpy as np
import pandas as pd

from constants import (ALPHA_GRID_POINTS, ARGMAX_TIE_TOL, DEFAULT_BETA, DEFAULT_SEED,
                       PRICE_TOL, SWEEP_VALIDATION_DRAWS)
from demand import LinearDemand
from equilibrium import analyse, refined_outcomes, RETAILER
from errors import InvalidStrategy
from fees import threshold_fees, continuum_start
from numerics import sweep_argmax, open_unit_grid
from payoff import GameParams, check_costs, pi_rr, pi_rs, pi_ss, seller_margin_payoff
from prices import optimal_price, seller_opt_price_at

logger = logging.getLogger(__name__)

EqPayoffs = namedtuple('EqPayoffs', ['retailer', 'seller', 'price', 'outcome', 'clamped'])
AlphaBar = namedtuple('AlphaBar', ['alpha_bar', 'value', 'flag'])
FeeGameSolution = namedtuple('FeeGameSolution', ['alpha_star', 'retailer_payoff', 'seller_payoff',
                                                 'outcome', 'alpha_bar'])
PayoffBounds = namedtuple('PayoffBounds', ['retailer', 'seller', 'alpha_star', 'seller_cap_worst_case'])


class Market:
    """
    Costs, tie split and demand without a fee: the retailer's decision problem.

    Args:
        c_r (float): Retailer cost.
        c_s (float): Seller cost.
        beta (float): Tie split passed on to every subgame.
        curve (DemandCurve, optional): Normalized demand (linear by default).
    """
    def __init__(self, c_r, c_s, beta=DEFAULT_BETA, curve=None):
        check_costs(c_r, c_s)
        self.c_r = float(c_r)
        self.c_s = float(c_s)
        self.beta = float(beta)
        self.curve = curve if curve is not None else LinearDemand()
        self._fees = None
        self._bars = {}

    @property
    def fees(self):
        """Threshold fees, computed once per market."""
        if self._fees is None:
            self._fees = threshold_fees(self.curve, self.c_r, self.c_s)
        return self._fees

    def alpha_bar(self, alpha_grid_n=ALPHA_GRID_POINTS):
        """alpha_bar on a fee grid of alpha_grid_n points, computed once per grid size."""
        if alpha_grid_n not in self._bars:
            self._bars[alpha_grid_n] = _alpha_bar(self, alpha_grid_n)
        return self._bars[alpha_grid_n]

    def at(self, alpha):
        """The staying subgame at fee alpha."""
        return GameParams(self.c_r, self.c_s, alpha, self.beta, self.curve)

    def context(self, alpha):
        return analyse(self.at(alpha), self.fees)

    def __repr__(self):
        return f"Market(c_r={self.c_r}, c_s={self.c_s}, beta={self.beta}, curve={self.curve!r})"


class StrategyProfile:
    """
    Selection rule rho for the continuum of refined outcomes.

    Args:
        kind (str): 'rho_low', 'rho_high' or 'custom'.
        alphas (array-like, optional): Strictly increasing fee knots (custom only).
        prices (array-like, optional): Prices at the knots (custom only).
    """
    KINDS = ('rho_low', 'rho_high', 'custom')

    def __init__(self, kind, alphas=None, prices=None):
        if kind not in self.KINDS:
            raise InvalidStrategy(f"Unknown strategy profile: '{kind}'. Available types are: {list(self.KINDS)}")
        self.kind = kind
        self.alphas = None
        self.prices = None
        if kind == 'custom':
            alphas = np.asarray(alphas, dtype=float)
            prices = np.asarray(prices, dtype=float)
            if alphas.ndim != 1 or alphas.size == 0 or alphas.shape != prices.shape:
                raise InvalidStrategy("A custom rho needs matching, non-empty alpha and price columns.")
            if np.any(np.diff(alphas) <= 0):
                raise InvalidStrategy("Custom rho fee knots must be strictly increasing.")
            self.alphas = alphas
            self.prices = prices

    @classmethod
    def low(cls):
        return cls('rho_low')

    @classmethod
    def high(cls):
        return cls('rho_high')

    def __repr__(self):
        if self.kind == 'custom':
            return f"StrategyProfile('custom', knots={self.alphas.size})"
        return f"StrategyProfile('{self.kind}')"


def load_rho_csv(csv_path):
    """Reads a custom rho from a CSV with columns `alpha,price`."""
    table = pd.read_csv(csv_path)
    missing = {'alpha', 'price'} - set(table.columns)
    if missing:
        raise InvalidStrategy(f"Rho table '{csv_path}' is missing columns {sorted(missing)}.")
    return StrategyProfile('custom', table['alpha'].to_numpy(), table['price'].to_numpy())


def create_strategy_profile(source):
    """
    Factory for strategy profiles: 'low', 'high' or the path of a rho table.
    """
    if isinstance(source, StrategyProfile):
        return source
    builder = RHO_MAP.get(str(source).lower())
    if builder is not None:
        return builder()
    if str(source).lower().endswith('.csv'):
        return load_rho_csv(source)
    raise InvalidStrategy(f"Unknown strategy profile: '{source}'. "
                          f"Available types are: {list(RHO_MAP.keys()) + ['<path>.csv']}")


RHO_MAP = {
    'low': StrategyProfile.low,
    'high': StrategyProfile.high,
    'rho_low': StrategyProfile.low,
    'rho_high': StrategyProfile.high,
}


def select_price(outcome, rho, alpha):
    """
    The price rho picks inside an outcome interval.

    Returns:
        tuple[float, bool]: (price, whether a custom table had to be clamped).
    """
    lo, hi = outcome.price_lo, outcome.price_hi
    if hi - lo <= PRICE_TOL or rho.kind == 'rho_low':
        return lo, False
    if rho.kind == 'rho_high':
        return hi, False
    wanted = float(np.interp(alpha, rho.alphas, rho.prices))
    price = min(max(wanted, lo), hi)
    return price, abs(price - wanted) > PRICE_TOL


def eq_payoffs(params, rho, context=None):
    """
    Payoffs in the refined equilibrium of the staying subgame selected by rho.

    On a regime boundary the lower-fee row is used; payoffs are continuous
    in alpha, so both rows agree there.

    Returns:
        EqPayoffs: (retailer, seller, price, outcome, clamped).
    """
    ctx = analyse(params) if context is None else context
    outcome = refined_outcomes(params, ctx)[0]
    price, clamped = select_price(outcome, rho, params.alpha)
    if outcome.fulfiller == RETAILER:
        return EqPayoffs(pi_rr(params, price), 0.0, price, outcome, clamped)
    return EqPayoffs(pi_rs(params, price), pi_ss(params, price), price, outcome, clamped)


def eq_payoff_curve(market, rho, alphas):
    """Retailer and seller equilibrium payoffs over a fee grid (arrays)."""
    results = [eq_payoffs(market.at(a), rho, market.context(a)) for a in alphas]
    retailer = np.array([r.retailer for r in results])
    seller = np.array([r.seller for r in results])
    clamped = sum(r.clamped for r in results)
    if clamped:
        logger.info("Custom rho was clamped into the continuum at %d of %d fees.", clamped, len(results))
    return retailer, seller, results


def alpha_bar(market, alpha_grid_n=ALPHA_GRID_POINTS):
    """
    Smallest maximizer of a -> pi_rs(p_s*(a), a) over (0, 1 - c_s), and
    whether that maximum beats the retailer's standalone payoff pi_rr(p_r*).

    Returns:
        AlphaBar: (alpha_bar, value, flag).
    """
    return market.alpha_bar(alpha_grid_n)


def _alpha_bar(market, alpha_grid_n):
    curve, c_s = market.curve, market.c_s

    def referral_at_seller_optimum(a):
        p = seller_opt_price_at(curve, c_s, a)
        return a * p * curve.quantity(p)

    grid = (1.0 - c_s) * open_unit_grid(alpha_grid_n)
    best_a, best_v = sweep_argmax(referral_at_seller_optimum, grid)
    p_rstar = optimal_price(curve, market.c_r)
    standalone = (p_rstar - market.c_r) * curve.quantity(p_rstar)
    flag = best_v > standalone + ARGMAX_TIE_TOL
    logger.debug("alpha_bar=%.10f value=%.10f standalone=%.10f flag=%s", best_a, best_v, standalone, flag)
    return AlphaBar(best_a, best_v, flag)


def _solution(market, rho, alpha, bar=None):
    eq = eq_payoffs(market.at(alpha), rho, market.context(alpha))
    return FeeGameSolution(alpha, eq.retailer, eq.seller, eq.outcome, None if bar is None else bar.alpha_bar)


def alpha_star(market, rho, alpha_grid_n=ALPHA_GRID_POINTS, seed=DEFAULT_SEED):
    """
    The retailer's optimal fee: smallest maximizer of its equilibrium payoff.

    rho_low has the closed form alpha_rstar and rho_high is alpha_bar or the
    start of the continuum; custom profiles are solved by a dense sweep with
    golden-section refinement, then checked against random fees.

    Args:
        market (Market): Costs, tie split and demand.
        rho (StrategyProfile): Selection rule.
        alpha_grid_n (int): Sweep resolution for custom profiles and alpha_bar.
        seed (int): Seed for the random validation draws.

    Returns:
        FeeGameSolution
    """
    fees = market.fees
    if rho.kind == 'rho_low':
        return _solution(market, rho, fees.alpha_rstar)
    if rho.kind == 'rho_high':
        bar = market.alpha_bar(alpha_grid_n)
        alpha = bar.alpha_bar if bar.flag else continuum_start(fees)
        return _solution(market, rho, alpha, bar)

    def retailer_payoff(a):
        return eq_payoffs(market.at(a), rho, market.context(a)).retailer

    best_a, best_v = sweep_argmax(retailer_payoff, open_unit_grid(alpha_grid_n))

    rng = np.random.default_rng(seed)
    draws = rng.uniform(0.0, 1.0, SWEEP_VALIDATION_DRAWS)
    better = [a for a in draws if 0.0 < a < 1.0 and retailer_payoff(a) > best_v + ARGMAX_TIE_TOL]
    if better:
        warnings.warn(f"Fee sweep found alpha*={best_a:.6f} but {len(better)} random fees do better "
                      f"(e.g. {better[0]:.6f}); the payoff may not be piecewise unimodal.", RuntimeWarning)
    return _solution(market, rho, best_a)


def payoff_bounds(market, alpha_grid_n=ALPHA_GRID_POINTS):
    """
    Bounds on equilibrium payoffs and on alpha* valid for every rho.

    Retailer: [pi_rs(p_s*, alpha_bar), pi_rs(p_r*, alpha_rstar)] when some fee
    lets the referral payoff at p_s* beat pi_rr(p_r*), else
    [pi_rr(p_r*), pi_rs(p_r*, alpha_rstar)].
    Seller: [0, pi_ss(p_s*, min{alpha_sstar, alpha_rdagger})], with the fee
    floored at 0 when alpha_sstar is negative.
    alpha*: [min{alpha_sstar, alpha_rdagger}, alpha_sdagger].

    Returns:
        PayoffBounds
    """
    fees, curve = market.fees, market.curve
    p_rstar = optimal_price(curve, market.c_r)
    upper = fees.alpha_rstar * p_rstar * curve.quantity(p_rstar)

    bar = market.alpha_bar(alpha_grid_n)
    if bar.flag:
        lower = bar.value
    else:
        lower = (p_rstar - market.c_r) * curve.quantity(p_rstar)

    fee_floor = min(fees.alpha_sstar, fees.alpha_rdagger)
    cap_fee = max(fee_floor, 0.0)
    seller_cap = seller_margin_payoff(curve, cap_fee, market.c_s,
                                      seller_opt_price_at(curve, market.c_s, cap_fee))

    worst_fee = continuum_start(fees)
    worst_cap = seller_margin_payoff(curve, worst_fee, market.c_s,
                                     seller_opt_price_at(curve, market.c_s, worst_fee))

    return PayoffBounds(retailer=(lower, upper),
                        seller=(0.0, seller_cap),
                        alpha_star=(fee_floor, fees.alpha_sdagger),
                        seller_cap_worst_case=worst_cap)
