"""
Brute-force best-response checks on a discretized price grid.

Only the payoff module is used here, so agreement between this oracle and
the analytic equilibrium code is independent evidence.

Candidate deviations for a player facing opponent price x are every grid
point, the tie at x, one cell below x and an infinitesimal undercut x - eps.
Tie profiles (p, p) in a scan are judged with a pure fulfiller (the seller
or the retailer serves the whole tie), matching the (p, x) notation of
shared-price equilibria.
"""
import logging
from collections import namedtuple

import numpy as np

from constants import ORACLE_GRID_POINTS, ORACLE_SLACK, INFINITESIMAL_UNDERCUT
from payoff import joint_payoffs, pi_rr, pi_rs, pi_ss

logger = logging.getLogger(__name__)

GridSpec = namedtuple('GridSpec', ['n', 'slack'], defaults=[ORACLE_GRID_POINTS, ORACLE_SLACK])

GridScan = namedtuple('GridScan', ['prices', 'off_diagonal', 'shared_seller', 'shared_retailer'])

GridOutcomes = namedtuple('GridOutcomes', ['seller', 'retailer'])


def check_grid(grid):
    if grid.n < 3:
        raise ValueError(f"GridSpec.n >= 3 violated (n={grid.n}).")
    if grid.slack <= 0:
        raise ValueError(f"GridSpec.slack > 0 violated (slack={grid.slack}).")


def grid_points(grid):
    check_grid(grid)
    return np.linspace(0.0, 1.0, grid.n)


def _candidates(points, own, opponent, h):
    extra = np.array([opponent, opponent - h, opponent - INFINITESIMAL_UNDERCUT])
    cand = np.concatenate([points, extra[(extra >= 0.0) & (extra <= 1.0)]])
    return cand[cand != own]


def grid_deviation_gains(params, p_r, p_s, grid=GridSpec(), fulfiller=None):
    """
    Largest payoff gain each player can get from a candidate deviation.

    Args:
        params (GameParams): Game parameters.
        p_r (float): Retailer price.
        p_s (float): Seller price.
        grid (GridSpec): Grid resolution and slack.
        fulfiller (str, optional): For a tie profile, 'seller' or 'retailer'
            serves it entirely; None splits it with params.beta.

    Returns:
        tuple[float, float]: (retailer gain, seller gain).
    """
    points = grid_points(grid)
    h = 1.0 / (grid.n - 1)

    if p_r == p_s and fulfiller is not None:
        beta = {'seller': 0.0, 'retailer': 1.0}[fulfiller]
        u_r, u_s = joint_payoffs(params, p_r, p_s, beta=beta)
    else:
        u_r, u_s = joint_payoffs(params, p_r, p_s)

    cand_r = _candidates(points, p_r, p_s, h)
    cand_s = _candidates(points, p_s, p_r, h)
    best_r = np.max(joint_payoffs(params, cand_r, np.full_like(cand_r, p_s))[0])
    best_s = np.max(joint_payoffs(params, np.full_like(cand_s, p_r), cand_s)[1])
    return best_r - u_r, best_s - u_s


def grid_is_nash(params, p_r, p_s, grid=GridSpec(), fulfiller=None):
    """True iff no candidate deviation improves either payoff by more than the slack."""
    gain_r, gain_s = grid_deviation_gains(params, p_r, p_s, grid, fulfiller)
    return gain_r <= grid.slack and gain_s <= grid.slack


def _below_max(values):
    """out[k] = max(values[:k]), -inf for k = 0."""
    out = np.empty_like(values)
    out[0] = -np.inf
    out[1:] = np.maximum.accumulate(values)[:-1]
    return out


def _undercut(payoff_fn, params, points):
    out = np.full(points.size, -np.inf)
    out[1:] = payoff_fn(params, points[1:] - INFINITESIMAL_UNDERCUT)
    return out


def grid_equilibrium_scan(params, grid=GridSpec()):
    """
    All grid price pairs that survive every candidate deviation.

    Best responses depend only on the opponent's price, so each player's best
    deviation payoff is computed once per opponent price from prefix maxima
    and the full n x n comparison is vectorised.

    Returns:
        GridScan: prices, off_diagonal[i_r, j_s] mask, and diagonal masks for
        ties served by the seller and by the retailer.
    """
    g = grid_points(grid)
    n, slack, beta = grid.n, grid.slack, params.beta
    rr, rs, ss = pi_rr(params, g), pi_rs(params, g), pi_ss(params, g)

    # --- Retailer facing p_s = g[j] ---
    raise_r = np.append(rs[:-1], -np.inf)
    best_r_strict = np.maximum.reduce([_below_max(rr), _undercut(pi_rr, params, g), raise_r])
    best_r = np.maximum(best_r_strict, beta * rr + (1.0 - beta) * rs)

    # --- Seller facing p_r = g[i] ---
    raise_s = np.append(np.zeros(n - 1), -np.inf)
    best_s_strict = np.maximum.reduce([_below_max(ss), _undercut(pi_ss, params, g), raise_s])
    best_s = np.maximum(best_s_strict, (1.0 - beta) * ss)

    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    retailer_low = i < j
    retailer_payoff = np.where(retailer_low, rr[:, None], rs[None, :])
    seller_payoff = np.where(retailer_low, 0.0, ss[None, :])
    off = ((retailer_payoff >= best_r[None, :] - slack)
           & (seller_payoff >= best_s[:, None] - slack)
           & (i != j))

    shared_seller = (rs >= best_r_strict - slack) & (ss >= best_s_strict - slack)
    shared_retailer = (rr >= best_r_strict - slack) & (0.0 >= best_s_strict - slack)

    logger.debug("Grid scan n=%d: %d off-diagonal, %d seller-tie, %d retailer-tie equilibria",
                 n, int(off.sum()), int(shared_seller.sum()), int(shared_retailer.sum()))
    return GridScan(g, off, shared_seller, shared_retailer)


def scan_image(scan):
    """The scan as one n x n mask with tie equilibria on the diagonal."""
    image = scan.off_diagonal.copy()
    k = np.arange(scan.prices.size)
    image[k, k] = scan.shared_seller | scan.shared_retailer
    return image


def _range_extreme(values, reducer, fill):
    """out[a, b] = reducer(values[a+1:b]) for a < b, fill elsewhere."""
    n = values.size
    a = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    masked = np.where(j > a, values[None, :], fill)
    running = reducer.accumulate(masked, axis=1)
    out = np.full((n, n), fill)
    out[:, 1:] = running[:, :-1]
    return np.where(j > a, out, fill)


def grid_admissible(params, grid=GridSpec()):
    """
    Grid strategies of each player that are not weakly dominated by another
    grid strategy, with ties split by params.beta.

    Returns:
        tuple[np.ndarray, np.ndarray]: (retailer mask, seller mask).
    """
    g = grid_points(grid)
    n, t, beta = grid.n, grid.slack, params.beta
    rr, rs, ss = pi_rr(params, g), pi_rs(params, g), pi_ss(params, g)
    tie_r = beta * rr + (1.0 - beta) * rs
    tie_s = (1.0 - beta) * ss

    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    upper = a < b
    has_tail = b < n - 1

    # --- Retailer: row a (lower price) against row b ---
    range_max = _range_extreme(rs, np.maximum, -np.inf)
    range_min = _range_extreme(rs, np.minimum, np.inf)
    rr_a, rr_b = rr[:, None], rr[None, :]
    tie_a, tie_b = tie_r[:, None], tie_r[None, :]
    rs_a = rs[:, None]

    low_ge = ((tie_a >= rs_a - t) & (rr_a >= range_max - t) & (rr_a >= tie_b - t)
              & (~has_tail | (rr_a >= rr_b - t)))
    low_gt = ((tie_a > rs_a + t) | (rr_a > range_min + t) | (rr_a > tie_b + t)
              | (has_tail & (rr_a > rr_b + t)))
    high_ge = ((rs_a >= tie_a - t) & (range_min >= rr_a - t) & (tie_b >= rr_a - t)
               & (~has_tail | (rr_b >= rr_a - t)))
    high_gt = ((rs_a > tie_a + t) | (range_max > rr_a + t) | (tie_b > rr_a + t)
               | (has_tail & (rr_b > rr_a + t)))
    low_dominates = upper & low_ge & low_gt
    high_dominates = upper & high_ge & high_gt
    retailer_ok = ~(low_dominates.any(axis=0) | high_dominates.any(axis=1))

    # --- Seller: row a (lower price) against row b ---
    ss_a, ss_b = ss[:, None], ss[None, :]
    ts_a, ts_b = tie_s[:, None], tie_s[None, :]
    gap = b > a + 1
    low_ge = ((ts_a >= -t) & (~gap | (ss_a >= -t)) & (ss_a >= ts_b - t)
              & (~has_tail | (ss_a >= ss_b - t)))
    low_gt = ((ts_a > t) | (gap & (ss_a > t)) | (ss_a > ts_b + t)
              | (has_tail & (ss_a > ss_b + t)))
    high_ge = ((ts_a <= t) & (~gap | (ss_a <= t)) & (ts_b >= ss_a - t)
               & (~has_tail | (ss_b >= ss_a - t)))
    high_gt = ((ts_a < -t) | (gap & (ss_a < -t)) | (ts_b > ss_a + t)
               | (has_tail & (ss_b > ss_a + t)))
    low_dominates = upper & low_ge & low_gt
    high_dominates = upper & high_ge & high_gt
    seller_ok = ~(low_dominates.any(axis=0) | high_dominates.any(axis=1))

    return retailer_ok, seller_ok


def _dilate(mask):
    out = mask.copy()
    out[1:] |= mask[:-1]
    out[:-1] |= mask[1:]
    return out


def grid_refined_outcomes(params, grid=GridSpec(), scan=None):
    """
    Outcomes of grid equilibria that use (near-)admissible strategies and are
    not Pareto dominated by another such equilibrium.

    Admissible sets are widened by one grid cell so an off-grid boundary
    price keeps its nearest equilibrium neighbour.

    Returns:
        GridOutcomes: sorted arrays of transaction prices per fulfiller.
    """
    scan = grid_equilibrium_scan(params, grid) if scan is None else scan
    g = scan.prices
    retailer_ok, seller_ok = grid_admissible(params, grid)
    retailer_ok, seller_ok = _dilate(retailer_ok), _dilate(seller_ok)

    off = scan.off_diagonal & retailer_ok[:, None] & seller_ok[None, :]
    i_idx, j_idx = np.nonzero(off)
    k_s = np.flatnonzero(scan.shared_seller & retailer_ok & seller_ok)
    k_r = np.flatnonzero(scan.shared_retailer & retailer_ok & seller_ok)

    # (price, fulfiller code, retailer payoff, seller payoff); code 0 = seller
    retailer_first = i_idx < j_idx
    price = np.concatenate([np.where(retailer_first, g[i_idx], g[j_idx]), g[k_s], g[k_r]])
    code = np.concatenate([np.where(retailer_first, 1, 0), np.zeros(k_s.size, int), np.ones(k_r.size, int)])
    u_r = np.concatenate([np.where(retailer_first, pi_rr(params, g[i_idx]), pi_rs(params, g[j_idx])),
                          pi_rs(params, g[k_s]), pi_rr(params, g[k_r])])
    u_s = np.concatenate([np.where(retailer_first, 0.0, pi_ss(params, g[j_idx])),
                          pi_ss(params, g[k_s]), np.zeros(k_r.size)])

    if price.size == 0:
        return GridOutcomes(np.array([]), np.array([]))

    # collapse identical (price, fulfiller) points before the Pareto step
    keys, first = np.unique(np.round(price * (grid.n - 1)).astype(int) * 2 + code, return_index=True)
    price, code, u_r, u_s = price[first], code[first], u_r[first], u_s[first]

    t = grid.slack
    weakly = (u_r[None, :] >= u_r[:, None] - t) & (u_s[None, :] >= u_s[:, None] - t)
    strictly = (u_r[None, :] > u_r[:, None] + t) | (u_s[None, :] > u_s[:, None] + t)
    dominated = (weakly & strictly).any(axis=1)

    keep = ~dominated
    return GridOutcomes(np.sort(price[keep & (code == 0)]), np.sort(price[keep & (code == 1)]))
