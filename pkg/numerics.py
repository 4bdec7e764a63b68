"""
Small numerical helpers shared by the price, fee and fee-game solvers:
bracketed bisection, golden-section maximisation and dense argmax sweeps.
"""
import logging
import math
import warnings

import numpy as np
from scipy.optimize import bisect

from constants import ROOT_XTOL, ROOT_MAX_ITER, GOLDEN_TOL, ARGMAX_TIE_TOL

logger = logging.getLogger(__name__)


def bracketed_root(func, lo, hi, xtol=ROOT_XTOL, maxiter=ROOT_MAX_ITER):
    """
    Finds a root of a function that changes sign on [lo, hi].

    Endpoint zeros are returned directly because scipy's bisect requires a
    strict sign change.

    Args:
        func (callable): Scalar function of one variable.
        lo (float): Left end of the bracket.
        hi (float): Right end of the bracket.
        xtol (float): Absolute tolerance on the root.
        maxiter (int): Iteration cap passed to scipy.

    Returns:
        float: The root.

    Raises:
        ValueError: If func has the same strict sign at both ends.
    """
    f_lo = func(lo)
    if f_lo == 0.0:
        return lo
    f_hi = func(hi)
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise ValueError(f"Root is not bracketed on [{lo}, {hi}] "
                         f"(f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e}).")

    root, result = bisect(func, lo, hi, xtol=xtol, maxiter=maxiter,
                          full_output=True, disp=False)
    if not result.converged:
        warnings.warn(f"Bisection on [{lo}, {hi}] stopped after {result.iterations} "
                      f"iterations without reaching xtol={xtol}.", RuntimeWarning)
    return root


def golden_section_max(obj, a, b, tol=GOLDEN_TOL):
    """
    Maximises a unimodal function on [a, b] by golden-section search.

    Returns:
        float: Location of the maximum.
    """
    inv_phi = (math.sqrt(5) - 1) / 2
    inv_phi_sq = (3 - math.sqrt(5)) / 2

    dist = b - a
    if dist <= tol:
        return (a + b) / 2

    n = int(math.ceil(math.log(tol / dist) / math.log(inv_phi)))

    c = a + inv_phi_sq * dist
    d = a + inv_phi * dist
    yc = obj(c)
    yd = obj(d)

    for _ in range(n - 1):
        # Ties keep the left part so plateaus resolve towards smaller arguments
        if yc >= yd:
            b = d
            d = c
            yd = yc
            dist = inv_phi * dist
            c = a + inv_phi_sq * dist
            yc = obj(c)
        else:
            a = c
            c = d
            yc = yd
            dist = inv_phi * dist
            d = a + inv_phi * dist
            yd = obj(d)

    if yc >= yd:
        return (a + d) / 2
    return (c + b) / 2


def first_argmax(values, tie_tol=ARGMAX_TIE_TOL):
    """Index of the first entry within tie_tol of the maximum."""
    values = np.asarray(values, dtype=float)
    best = np.nanmax(values)
    return int(np.flatnonzero(values >= best - tie_tol)[0])


def sweep_argmax(obj, grid, feasible=None, tie_tol=ARGMAX_TIE_TOL):
    """
    Maximises obj over a sorted grid, then refines around the best cell.

    The smallest argument attaining the maximum is preferred: after a
    golden-section pass that fails to improve on the grid maximum, the left
    edge of the plateau is located by bisection.

    Args:
        obj (callable): Scalar objective.
        grid (np.ndarray): Sorted candidate arguments.
        feasible (callable, optional): Predicate; infeasible points are never
            returned. The grid values themselves are filtered the same way.
        tie_tol (float): Tolerance for treating two values as equal.

    Returns:
        tuple[float, float]: (argument, objective value).
    """
    grid = np.asarray(grid, dtype=float)
    values = np.array([obj(x) for x in grid])
    if feasible is not None:
        mask = np.array([feasible(x) for x in grid])
        if not mask.any():
            raise ValueError("No feasible point on the sweep grid.")
        values = np.where(mask, values, -np.inf)
    else:
        mask = np.ones(grid.size, dtype=bool)

    i = first_argmax(values, tie_tol)
    best_x, best_v = grid[i], values[i]

    lo = grid[i - 1] if i > 0 and mask[i - 1] else best_x
    hi = grid[i + 1] if i + 1 < grid.size and mask[i + 1] else best_x
    if hi > lo:
        x_g = golden_section_max(obj, lo, hi)
        v_g = obj(x_g)
        if v_g > best_v + tie_tol and (feasible is None or feasible(x_g)):
            logger.debug("Golden-section refinement moved argmax %.10f -> %.10f", best_x, x_g)
            return x_g, v_g

    # No improvement: pull the answer to the left edge of the plateau
    if lo < best_x:
        left = threshold_left_edge(obj, lo, best_x, best_v - tie_tol)
        if feasible is None or feasible(left):
            return left, obj(left)
    return best_x, best_v


def threshold_left_edge(obj, lo, hi, target, xtol=ROOT_XTOL, maxiter=ROOT_MAX_ITER):
    """
    Smallest x in [lo, hi] (to xtol) with obj(x) >= target, given obj(hi) >= target.

    Keeps the invariant obj(a) < target <= obj(b), so the returned point always
    satisfies the threshold even when obj jumps across it.
    """
    if obj(lo) >= target:
        return lo
    a, b = lo, hi
    for _ in range(maxiter):
        if b - a <= xtol:
            break
        mid = 0.5 * (a + b)
        if obj(mid) >= target:
            b = mid
        else:
            a = mid
    return b


def threshold_right_edge(pred, lo, hi, xtol=ROOT_XTOL, maxiter=ROOT_MAX_ITER):
    """
    Largest x in [lo, hi] (to xtol) with pred(x) true, given pred(lo) true and pred(hi) false.
    """
    a, b = lo, hi
    for _ in range(maxiter):
        if b - a <= xtol:
            break
        mid = 0.5 * (a + b)
        if pred(mid):
            a = mid
        else:
            b = mid
    return a


def open_unit_grid(n):
    """n evenly spaced points strictly inside (0, 1)."""
    return (np.arange(n, dtype=float) + 0.5) / n
