"""
Cross-checks the analytic equilibrium code against the grid oracle.

For every fee on an alpha grid the refined outcomes from `equilibrium` are
compared with the refined grid equilibria from `oracle` and with the
outcomes derived from the refined Nash families. Mismatches within a
small band around a threshold fee are reported as boundary-ambiguous; any
other mismatch is a failure.
"""
import logging

import numpy as np

from constants import DEFAULT_BETA, DEFAULT_SEED
from equilibrium import analyse, derivation_mismatches, nash_set, refined_outcomes, SELLER, RETAILER
from equilibrium import SharedSellerInterval, RetailerFixedSellerAbove
from fees import threshold_fees, shifted
from oracle import GridSpec, grid_equilibrium_scan, grid_refined_outcomes, scan_image
from payoff import GameParams

logger = logging.getLogger(__name__)

# Outcome prices may sit up to this many price cells from the analytic value
MATCH_CELLS = 2
# Extra price cells added to the alpha cell when labelling boundary-ambiguous fees
AMBIGUITY_CELLS = 4


def _interval_distance(p, lo, hi):
    return np.maximum(np.maximum(lo - p, p - hi), 0.0)


def compare_outcomes(analytic, grid_out, h):
    """
    Compares analytic outcomes with grid outcome prices.

    Args:
        analytic (list[Outcome]): Rows from refined_outcomes.
        grid_out (GridOutcomes): Prices from grid_refined_outcomes.
        h (float): Price grid spacing.

    Returns:
        list[str]: Human-readable mismatch descriptions (empty when they agree).
    """
    tol = MATCH_CELLS * h + 1e-12
    problems = []
    for fulfiller, found in ((SELLER, grid_out.seller), (RETAILER, grid_out.retailer)):
        rows = [o for o in analytic if o.fulfiller == fulfiller]
        for o in rows:
            inner = np.arange(np.ceil(o.price_lo / h), np.floor(o.price_hi / h) + 1) * h
            wanted = np.concatenate([[o.price_lo, o.price_hi], inner])
            if found.size == 0:
                problems.append(f"missing {fulfiller} outcome [{o.price_lo:.6f}, {o.price_hi:.6f}]")
                continue
            gaps = np.min(np.abs(wanted[:, None] - found[None, :]), axis=1)
            if np.any(gaps > tol):
                p = wanted[np.argmax(gaps)]
                problems.append(f"{fulfiller} outcome price {p:.6f} has no grid equilibrium nearby")
        for p in found:
            dist = [_interval_distance(p, o.price_lo, o.price_hi) for o in rows]
            if not dist or min(dist) > tol:
                problems.append(f"spurious {fulfiller} grid outcome at {p:.6f}")
    return problems


def _family_image(families, prices):
    """Analytic Nash families rasterised onto the n x n grid, ties on the diagonal."""
    n = prices.size
    h = 1.0 / (n - 1)
    image = np.zeros((n, n), dtype=bool)

    def span(lo, hi):
        a = int(np.clip(np.ceil(lo / h - 1e-9), 0, n - 1))
        b = int(np.clip(np.floor(hi / h + 1e-9), 0, n - 1))
        ends = {int(np.clip(round(lo / h), 0, n - 1)), int(np.clip(round(hi / h), 0, n - 1))}
        return sorted(set(range(a, b + 1)) | ends)

    for family in families:
        if isinstance(family, SharedSellerInterval):
            k = span(family.lo, family.hi)
            image[k, k] = True
        elif isinstance(family, RetailerFixedSellerAbove):
            i = int(np.clip(round(family.p_r / h), 0, n - 1))
            image[i, span(family.seller_lo, family.seller_hi)] = True
        else:
            j = int(np.clip(round(family.p_s / h), 0, n - 1))
            image[span(family.retailer_lo, family.retailer_hi), j] = True
    return image


def _dilate2d(mask):
    out = mask.copy()
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    grown = out.copy()
    grown[:, 1:] |= out[:, :-1]
    grown[:, :-1] |= out[:, 1:]
    return grown


def check_nash_families(params, grid=GridSpec(), scan=None, context=None):
    """
    Two-way containment between the analytic Nash families and the grid scan,
    each side dilated by one grid cell.

    Returns:
        dict: Counts of analytic cells the scan misses and of scan cells no
        family explains.
    """
    scan = grid_equilibrium_scan(params, grid) if scan is None else scan
    ctx = analyse(params) if context is None else context
    analytic = _family_image(nash_set(params, ctx), scan.prices)
    found = scan_image(scan)
    missed = analytic & ~_dilate2d(found)
    unexplained = found & ~_dilate2d(analytic)
    return {'missed_cells': int(missed.sum()), 'unexplained_cells': int(unexplained.sum())}


def _thresholds(fees, c_s):
    return {'alpha_sstar': fees.alpha_sstar, 'alpha_rdagger': fees.alpha_rdagger,
            'alpha_opt': fees.alpha_opt, 'alpha_rstar': fees.alpha_rstar,
            'alpha_sdagger': fees.alpha_sdagger, 'one_minus_cs': 1.0 - c_s}


def _grid_kind(grid_out, h):
    seller, retailer = grid_out.seller, grid_out.retailer
    if seller.size and retailer.size:
        return 'mixed'
    if retailer.size:
        return 'retailer'
    if not seller.size:
        return 'none'
    return 'seller_interval' if seller[-1] - seller[0] > MATCH_CELLS * h else 'seller_point'


def verify_cell(params, fees, grid, alpha_cell, check_families=True):
    """
    Verifies one (costs, alpha) cell.

    Args:
        params (GameParams): Game parameters.
        fees (ThresholdFees): Threshold fees used by the analytic side
            (possibly shifted for fault injection).
        grid (GridSpec): Oracle grid.
        alpha_cell (float): Width of the fee cell this alpha represents.
        check_families (bool): Also compare unrefined Nash families.

    Returns:
        dict: Cell record; `problems` lists the mismatches.
    """
    h = 1.0 / (grid.n - 1)
    ctx = analyse(params, fees)
    scan = grid_equilibrium_scan(params, grid)
    grid_out = grid_refined_outcomes(params, grid, scan)
    problems = compare_outcomes(refined_outcomes(params, ctx), grid_out, h)
    problems.extend(derivation_mismatches(params, ctx))

    if check_families:
        nash = check_nash_families(params, grid, scan, ctx)
        if nash['missed_cells']:
            problems.append(f"grid scan misses {nash['missed_cells']} analytic equilibrium cells")
        if nash['unexplained_cells']:
            problems.append(f"grid scan has {nash['unexplained_cells']} equilibrium cells outside every family")

    band = alpha_cell + AMBIGUITY_CELLS * h
    near = sorted(name for name, t in _thresholds(fees, params.c_s).items() if abs(params.alpha - t) <= band)
    return {'c_r': params.c_r, 'c_s': params.c_s, 'alpha': params.alpha,
            'kind': _grid_kind(grid_out, h), 'problems': problems,
            'boundary_ambiguous': bool(problems) and bool(near), 'near_thresholds': near}


def _measured_boundaries(cells, thresholds):
    boundaries = []
    for left, right in zip(cells[:-1], cells[1:]):
        if left['kind'] == right['kind']:
            continue
        at = 0.5 * (left['alpha'] + right['alpha'])
        name, value = min(thresholds.items(), key=lambda item: abs(item[1] - at))
        boundaries.append({'alpha': at, 'from': left['kind'], 'to': right['kind'],
                           'nearest_threshold': name, 'distance': abs(value - at)})
    return boundaries


def _summarise(cells):
    failures = [c for c in cells if c['problems'] and not c['boundary_ambiguous']]
    return {'cells': len(cells),
            'disagreements': len(failures),
            'boundary_ambiguous': sum(c['boundary_ambiguous'] for c in cells),
            'failures': failures}


def sweep_verify(c_r, c_s, curve, alphas, grid=GridSpec(), beta=DEFAULT_BETA, perturb_fee=0.0):
    """
    Compares analytic and grid outcomes over a fee grid for one cost pair.

    Args:
        c_r (float): Retailer cost.
        c_s (float): Seller cost.
        curve (DemandCurve): Normalized demand.
        alphas (np.ndarray): Sorted fees in (0, 1).
        grid (GridSpec): Oracle grid.
        beta (float): Tie split.
        perturb_fee (float): Offset added to every analytic threshold fee.

    Returns:
        dict: Report with per-cell failures, ambiguous counts and the fee
        boundaries where the grid outcome structure changes.
    """
    alphas = np.asarray(alphas, dtype=float)
    fees = threshold_fees(curve, c_r, c_s)
    if perturb_fee:
        logger.warning("Shifting every threshold fee by %g for this run.", perturb_fee)
        fees = shifted(fees, perturb_fee)
    alpha_cell = float(np.min(np.diff(alphas))) if alphas.size > 1 else 0.0

    logger.info("Verifying c_r=%g, c_s=%g on %d fees with a %d-point price grid.", c_r, c_s, alphas.size, grid.n)
    base = GameParams(c_r, c_s, float(alphas[0]), beta, curve)
    cells = [verify_cell(base.with_alpha(float(a)), fees, grid, alpha_cell) for a in alphas]

    thresholds = _thresholds(fees, c_s)
    report = _summarise(cells)
    report.update({'c_r': c_r, 'c_s': c_s, 'grid_n': grid.n, 'thresholds': thresholds,
                   'boundaries': _measured_boundaries(cells, thresholds)})
    return report


def random_verify(draws, curve, grid=GridSpec(), beta=DEFAULT_BETA, seed=DEFAULT_SEED,
                  perturb_fee=0.0, alpha_cell=1e-3):
    """
    Verifies `draws` random (c_r, c_s, alpha) triples.

    Costs are drawn with 0.05 <= c_s < c_r - 0.02 and c_r <= 0.95, so payoffs stay well
    above the oracle slack.

    Returns:
        dict: Same summary fields as sweep_verify plus the seed.
    """
    rng = np.random.default_rng(seed)
    cells = []
    for _ in range(draws):
        c_r = rng.uniform(0.1, 0.95)
        c_s = rng.uniform(0.05, c_r - 0.02)
        alpha = rng.uniform(0.01, 0.99)
        fees = threshold_fees(curve, c_r, c_s)
        if perturb_fee:
            fees = shifted(fees, perturb_fee)
        cell = verify_cell(GameParams(c_r, c_s, alpha, beta, curve), fees, grid, alpha_cell)
        logger.debug("Draw c_r=%.6f c_s=%.6f alpha=%.6f: %s", c_r, c_s, alpha, cell['problems'] or 'ok')
        cells.append(cell)
    report = _summarise(cells)
    report.update({'seed': seed, 'draws': draws, 'grid_n': grid.n})
    return report
