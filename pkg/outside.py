"""
The seller's outside option: leaving the program and selling independently
at cost c_s + delta against the retailer at cost c_r.

The retailer anticipates the threat and restricts itself to fees at which
the seller weakly prefers to stay.
"""
import logging
import warnings
from collections import namedtuple

import numpy as np

from constants import ALPHA_GRID_POINTS, ARGMAX_TIE_TOL, DEFAULT_SEED
from equilibrium import Outcome, SELLER
from errors import InvalidDelta, NoStayRegion
from feegame import alpha_star, eq_payoffs
from numerics import open_unit_grid, sweep_argmax, threshold_right_edge
from payoff import check_costs
from prices import optimal_price

logger = logging.getLogger(__name__)

LeavingOutcome = namedtuple('LeavingOutcome', ['outcome', 'seller_payoff', 'retailer_payoff'])
StayRegion = namedtuple('StayRegion', ['alpha_max', 'leaving_seller_payoff', 'contiguous', 'feasible_cells'])
FullGameSolution = namedtuple('FullGameSolution', ['alpha_star_o', 'seller_stays', 'alpha_max',
                                                   'leaving_outcome', 'leaving_seller_payoff',
                                                   'retailer_payoff', 'seller_payoff', 'outcome',
                                                   'contiguous'])


def check_delta(c_r, c_s, delta):
    """Raises InvalidDelta unless 0 < delta < c_r - c_s."""
    if not 0.0 < delta < c_r - c_s:
        raise InvalidDelta(f"0 < delta < c_r - c_s violated (delta={delta}, c_r - c_s={c_r - c_s:.6g}).")


def leaving_outcome(curve, c_r, c_s, delta):
    """
    Outcome of the leaving subgame: the seller sells at
    min{c_r, argmax (p - c_s - delta) q(p)} and the retailer earns nothing.
    The result does not depend on the fee.

    Returns:
        LeavingOutcome: (Outcome, seller payoff, retailer payoff).
    """
    check_costs(c_r, c_s)
    check_delta(c_r, c_s, delta)
    monopoly = optimal_price(curve, c_s + delta)
    price = min(c_r, monopoly)
    payoff = (price - c_s - delta) * curve.quantity(price)
    return LeavingOutcome(Outcome(price, price, SELLER, 'leave_s'), payoff, 0.0)


def _stays(market, rho, leave_payoff):
    def predicate(alpha):
        if not 0.0 < alpha < 1.0:
            return False
        return eq_payoffs(market.at(alpha), rho, market.context(alpha)).seller >= leave_payoff - ARGMAX_TIE_TOL
    return predicate


def alpha_max(market, delta, rho, alpha_grid_n=ALPHA_GRID_POINTS):
    """
    Largest fee at which the seller's staying payoff weakly exceeds its
    leaving payoff, refined by bisection on the boundary cell.

    Returns:
        StayRegion

    Raises:
        NoStayRegion: If the seller would leave at every fee on the grid.
    """
    leave = leaving_outcome(market.curve, market.c_r, market.c_s, delta).seller_payoff
    stays = _stays(market, rho, leave)
    grid = open_unit_grid(alpha_grid_n)
    mask = np.array([stays(a) for a in grid])
    cells = np.flatnonzero(mask)
    if not cells.size:
        raise NoStayRegion(f"The seller leaves at every fee for c_r={market.c_r}, c_s={market.c_s}, "
                           f"delta={delta} (leaving payoff {leave:.6g}).")

    contiguous = bool(np.all(np.diff(cells) == 1))
    if not contiguous:
        warnings.warn(f"The stay region for delta={delta} is not an interval on the fee grid; "
                      f"reporting its supremum.", RuntimeWarning)

    last = cells[-1]
    if last + 1 < grid.size:
        sup = threshold_right_edge(stays, grid[last], grid[last + 1])
    else:
        sup = grid[last]
    logger.info("alpha_max=%.10f for delta=%g (%d feasible fee cells).", sup, delta, cells.size)
    return StayRegion(sup, leave, contiguous, int(cells.size))


def solve_full_game(market, delta, rho, alpha_grid_n=ALPHA_GRID_POINTS, seed=DEFAULT_SEED):
    """
    The retailer's optimal fee when the seller can leave.

    The unconstrained optimum is kept when the seller stays there; otherwise
    the retailer's payoff is maximized over fees with the stay constraint,
    smallest fee first. An indifferent seller stays.

    Returns:
        FullGameSolution

    Raises:
        NoStayRegion: Propagated from alpha_max.
    """
    leaving = leaving_outcome(market.curve, market.c_r, market.c_s, delta)
    region = alpha_max(market, delta, rho, alpha_grid_n)
    stays = _stays(market, rho, leaving.seller_payoff)

    unconstrained = alpha_star(market, rho, alpha_grid_n, seed)
    if stays(unconstrained.alpha_star):
        chosen = unconstrained.alpha_star
    else:
        def retailer_payoff(a):
            return eq_payoffs(market.at(a), rho, market.context(a)).retailer

        grid = open_unit_grid(alpha_grid_n)
        grid = np.append(grid[grid < region.alpha_max], region.alpha_max)
        chosen, _ = sweep_argmax(retailer_payoff, grid, feasible=stays)

    eq = eq_payoffs(market.at(chosen), rho, market.context(chosen))
    return FullGameSolution(alpha_star_o=chosen, seller_stays=True, alpha_max=region.alpha_max,
                            leaving_outcome=leaving.outcome, leaving_seller_payoff=leaving.seller_payoff,
                            retailer_payoff=eq.retailer, seller_payoff=eq.seller, outcome=eq.outcome,
                            contiguous=region.contiguous)
