"""
Command-line front end for the shared-revenue Bertrand solver.

Every command emits data (JSON or CSV) on stdout, or into --out:

    report          key prices, threshold fees, equilibria and fee-game results
    region-map      refined outcome label over a (cost x fee) lattice
    payoff-curves   payoffs over prices (fixed alpha) or equilibrium payoffs over alpha
    fee-sweep       optimal fees and payoff bounds over a cost lattice
    verify          grid-oracle cross-check of the analytic equilibria

Exit codes: 0 success, 1 verification failure or unexpected error, 2 config error.
"""
import argparse
import json
import logging
import math
import os
import sys
import tempfile
import traceback

import numpy as np
import pandas as pd

from constants import (FEE_SWEEP_POINTS, REGION_MAP_POINTS, SCHEMA_VERSION, SIGNIFICANT_DIGITS,
                       VERIFY_ALPHA_POINTS, VERIFY_DRAWS)
from equilibrium import (admissible_set, admissible_strategies, nash_set, pareto_refine,
                         refined_outcomes)
from errors import InvalidCosts, InvalidDelta, NoStayRegion
from feegame import StrategyProfile, alpha_bar, alpha_star, eq_payoff_curve, eq_payoffs, payoff_bounds
from fees import cost_case
from numerics import open_unit_grid
from outside import leaving_outcome, solve_full_game
from payoff import pi_rr, pi_rs, pi_ss
from prices import key_prices
from scenario import DEFAULTS, ScenarioConfig
from verification import random_verify, sweep_verify

logger = logging.getLogger(__name__)


# --- Output helpers ---

def _clean(value):
    """JSON-ready copy with floats rounded to SIGNIFICANT_DIGITS and non-finite values as null."""
    if hasattr(value, '_asdict'):
        return _clean(value._asdict())
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(f"{v:.{SIGNIFICANT_DIGITS}g}") if math.isfinite(v) else None
    return value


def write_output(text, out=None):
    """Writes text to stdout, or atomically to `out` through a temporary file."""
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
        os.replace(tmp_path, out)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info("Saved results to: %s", out)


def to_json(doc):
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def to_csv(table):
    return table.to_csv(index=False, float_format=f"%.{SIGNIFICANT_DIGITS}g")


def _document(command, config, **body):
    return {'schema_version': SCHEMA_VERSION, 'command': command, 'scenario': config.to_dict(), **body}


def _family(family):
    return {'family': type(family).__name__, **family._asdict()}


def _cost_lattice(config, axis, points, command):
    """(x, c_r, c_s) triples along one cost axis; the other cost stays fixed."""
    fixed = 'c_s' if axis == 'cr' else 'c_r'
    config.require_costs(command, fixed)
    for x in open_unit_grid(points):
        if axis == 'cr':
            yield float(x), float(x), config.c_s
        else:
            yield float(x), config.c_r, float(x)


# --- Commands ---

def cmd_report(config):
    """
    Key prices, threshold fees, equilibrium families at the configured fee,
    the fee game and (with delta) the full game with the outside option.

    Returns:
        dict: The report document.
    """
    config.require_costs('report')
    market = config.market()
    rho = config.rho_profile()
    fees = market.fees
    logger.info("Computing report for c_r=%g, c_s=%g.", market.c_r, market.c_s)

    subgame = None
    if config.alpha is not None:
        params = market.at(config.alpha)
        ctx = market.context(config.alpha)
        admissible = admissible_set(params, ctx)
        (r_lo, r_hi), (s_lo, s_hi) = admissible_strategies(params, ctx)
        eq = eq_payoffs(params, rho, ctx)
        subgame = {
            'alpha': params.alpha,
            'key_prices': ctx.prices,
            'nash': [_family(f) for f in nash_set(params, ctx)],
            'admissible_strategies': {'retailer': [r_lo, r_hi], 'seller': [s_lo, s_hi]},
            'admissible': [_family(f) for f in admissible],
            'pareto': [_family(f) for f in pareto_refine(params, admissible, ctx)],
            'outcomes': refined_outcomes(params, ctx),
            'equilibrium': {'price': eq.price, 'fulfiller': eq.outcome.fulfiller, 'label': eq.outcome.label,
                            'retailer_payoff': eq.retailer, 'seller_payoff': eq.seller},
        }

    solution = alpha_star(market, rho, config.alpha_grid_n, config.seed)
    bounds = payoff_bounds(market, config.alpha_grid_n)
    fee_game = {
        'rho': repr(rho),
        'alpha_star': solution.alpha_star,
        'alpha_bar': solution.alpha_bar,
        'retailer_payoff': solution.retailer_payoff,
        'seller_payoff': solution.seller_payoff,
        'outcome': solution.outcome,
        'bounds': bounds,
    }

    outside = None
    if config.delta is not None:
        try:
            full = solve_full_game(market, config.delta, rho, config.alpha_grid_n, config.seed)
            outside = {'delta': config.delta, **full._asdict()}
        except NoStayRegion as e:
            logger.warning("%s", e)
            outside = {'delta': config.delta, 'error': str(e)}

    return _document('report', config, case=cost_case(fees, market.c_s), thresholds=fees,
                     subgame=subgame, fee_game=fee_game, outside_option=outside)


def cmd_region_map(config, axis='cs', points=REGION_MAP_POINTS):
    """
    Label of the refined outcome at every (x, alpha) lattice cell.

    Args:
        config (ScenarioConfig): Scenario with the fixed cost set.
        axis (str): 'cs' varies c_s at fixed c_r, 'cr' varies c_r at fixed c_s.
        points (int): Lattice points per axis.

    Returns:
        pd.DataFrame: Columns x, alpha, outcome_label, price_lo, price_hi.
    """
    if axis not in AXES:
        raise ValueError(f"Unknown axis: '{axis}'. Available types are: {list(AXES)}")
    alphas = open_unit_grid(points)
    rows = []
    for x, c_r, c_s in _cost_lattice(config, axis, points, 'region-map'):
        try:
            market = config.market(c_r, c_s)
        except InvalidCosts:
            rows.extend((x, a, 'infeasible', np.nan, np.nan) for a in alphas)
            continue
        for a in alphas:
            first = refined_outcomes(market.at(a), market.context(a))[0]
            rows.append((x, a, first.label, first.price_lo, first.price_hi))
    logger.info("Region map: %d cells on the %s axis.", len(rows), axis)
    return pd.DataFrame(rows, columns=['x', 'alpha', 'outcome_label', 'price_lo', 'price_hi'])


def cmd_payoff_curves(config, mode=None):
    """
    Payoff curve data.

    'price' mode (needs alpha): pi_rr, pi_rs and pi_ss over a price grid of
    grid_n points, plus one marker row per key price.
    'alpha' mode: equilibrium payoffs and region label over the fee grid,
    with the seller's leaving payoff when delta is set.

    Returns:
        pd.DataFrame
    """
    config.require_costs('payoff-curves')
    mode = mode or ('price' if config.alpha is not None else 'alpha')

    if mode == 'price':
        config.require_alpha('payoff-curves')
        params = config.params()
        p = np.linspace(0.0, 1.0, config.grid_n)
        markers = {name: value for name, value in key_prices(params)._asdict().items()
                   if value is not None and 0.0 <= value <= 1.0}
        p_all = np.concatenate([p, list(markers.values())])
        table = pd.DataFrame({'p': p_all,
                              'pi_rr': pi_rr(params, p_all),
                              'pi_rs': pi_rs(params, p_all),
                              'pi_ss': pi_ss(params, p_all),
                              'marker': [''] * p.size + list(markers.keys())})
        return table.sort_values('p', kind='mergesort').reset_index(drop=True)

    if mode != 'alpha':
        raise ValueError(f"Unknown payoff-curve mode: '{mode}'. Available types are: ['price', 'alpha']")
    config.ignore_alpha('payoff-curves')
    market = config.market()
    alphas = open_unit_grid(config.alpha_grid_n)
    retailer, seller, results = eq_payoff_curve(market, config.rho_profile(), alphas)
    table = pd.DataFrame({'alpha': alphas, 'pi_r_eq': retailer, 'pi_s_eq': seller,
                          'region_label': [r.outcome.label for r in results]})
    if config.delta is not None:
        table['pi_s_leave'] = leaving_outcome(market.curve, market.c_r, market.c_s, config.delta).seller_payoff
    return table


def _fee_sweep_row(config, market, rho):
    n = config.alpha_grid_n
    bar = alpha_bar(market, n)
    bounds = payoff_bounds(market, n)
    row = {'alpha_star_low': alpha_star(market, StrategyProfile.low(), n).alpha_star,
           'alpha_star_high': alpha_star(market, StrategyProfile.high(), n).alpha_star,
           'alpha_bar': bar.alpha_bar,
           'flag': bar.flag,
           'retailer_lo': bounds.retailer[0],
           'retailer_hi': bounds.retailer[1],
           'seller_hi': bounds.seller[1]}
    if config.delta is not None:
        row['alpha_max'] = row['alpha_star_o'] = np.nan
        try:
            full = solve_full_game(market, config.delta, rho, n, config.seed)
            row['alpha_max'], row['alpha_star_o'] = full.alpha_max, full.alpha_star_o
        except (InvalidDelta, NoStayRegion) as e:
            logger.debug("No full-game solution at c_r=%g, c_s=%g: %s", market.c_r, market.c_s, e)
    return row


def cmd_fee_sweep(config, axis='cs', points=FEE_SWEEP_POINTS):
    """
    Optimal fees, alpha_bar and payoff bounds along one cost axis.

    Returns:
        pd.DataFrame: Columns x, alpha_star_low, alpha_star_high, alpha_bar,
        flag, retailer_lo, retailer_hi, seller_hi and, with delta, alpha_max
        and alpha_star_o. Infeasible cost pairs are skipped.
    """
    if axis not in AXES:
        raise ValueError(f"Unknown axis: '{axis}'. Available types are: {list(AXES)}")
    config.ignore_alpha('fee-sweep')
    rho = config.rho_profile()
    rows, skipped = [], 0
    for x, c_r, c_s in _cost_lattice(config, axis, points, 'fee-sweep'):
        try:
            market = config.market(c_r, c_s)
        except InvalidCosts:
            skipped += 1
            continue
        rows.append({'x': x, **_fee_sweep_row(config, market, rho)})
    if skipped:
        logger.info("Fee sweep skipped %d infeasible cost pairs.", skipped)
    columns = ['x', 'alpha_star_low', 'alpha_star_high', 'alpha_bar', 'flag',
               'retailer_lo', 'retailer_hi', 'seller_hi']
    if config.delta is not None:
        columns += ['alpha_max', 'alpha_star_o']
    return pd.DataFrame(rows, columns=columns)


def cmd_verify(config, alpha_points=VERIFY_ALPHA_POINTS, draws=VERIFY_DRAWS, perturb_fee=0.0):
    """
    Grid-oracle verification.

    With both costs set, the fee axis is swept for that cost pair; otherwise
    `draws` random (c_r, c_s, alpha) triples are checked.

    Returns:
        tuple[dict, int]: (report document, exit code).
    """
    grid, curve = config.grid(), config.curve()
    if config.c_r is not None and config.c_s is not None:
        report = sweep_verify(config.c_r, config.c_s, curve, open_unit_grid(alpha_points), grid,
                              config.beta, perturb_fee)
    else:
        report = random_verify(draws, curve, grid, config.beta, config.seed, perturb_fee,
                               alpha_cell=1.0 / alpha_points)
    code = 1 if report['disagreements'] else 0
    if code:
        logger.error("Verification found %d disagreements outside boundary-ambiguous cells.",
                     report['disagreements'])
    return _document('verify', config, seed=config.seed, perturb_fee=perturb_fee, report=report), code


# --- Entry point ---

AXES = ('cr', 'cs')


def _emit(config, table_or_doc, command, default_format):
    fmt = config.format or default_format
    if isinstance(table_or_doc, pd.DataFrame):
        if fmt == 'csv':
            return write_output(to_csv(table_or_doc), config.out)
        doc = _document(command, config, rows=table_or_doc.to_dict('records'))
        return write_output(to_json(doc), config.out)
    write_output(to_json(table_or_doc), config.out)


def run_command(args):
    """Resolves the scenario and runs one subcommand; returns the exit code."""
    overrides = {name: getattr(args, name, None) for name in DEFAULTS}
    config = ScenarioConfig.from_sources(args.config, overrides)
    logger.debug("Resolved %r", config)

    if args.command == 'report':
        _emit(config, cmd_report(config), 'report', 'json')
    elif args.command == 'region-map':
        _emit(config, cmd_region_map(config, args.axis, args.points or REGION_MAP_POINTS), 'region-map', 'csv')
    elif args.command == 'payoff-curves':
        _emit(config, cmd_payoff_curves(config, args.mode), 'payoff-curves', 'csv')
    elif args.command == 'fee-sweep':
        _emit(config, cmd_fee_sweep(config, args.axis, args.points or FEE_SWEEP_POINTS), 'fee-sweep', 'csv')
    elif args.command == 'verify':
        doc, code = cmd_verify(config, args.alpha_grid_n or VERIFY_ALPHA_POINTS, args.draws, args.perturb_fee)
        _emit(config, doc, 'verify', 'json')
        return code
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None,
                        help="Scenario JSON file (see scenario_config.json); flags override it")
    common.add_argument('--cr', dest='c_r', type=float, help="Retailer cost c_r")
    common.add_argument('--cs', dest='c_s', type=float, help="Seller cost c_s")
    common.add_argument('--alpha', type=float, help="Referral fee")
    common.add_argument('--delta', type=float, help="Seller's extra cost when leaving the program")
    common.add_argument('--beta', type=float, help="Retailer's share of demand on a tie (default 0.5)")
    common.add_argument('--demand', type=str, help="'linear' or a price,quantity CSV table")
    common.add_argument('--p-max', dest='p_max', type=float, help="Raw price where tabulated demand vanishes")
    common.add_argument('--rho', type=str, help="Strategy profile: low, high or an alpha,price CSV table")
    common.add_argument('--grid-n', dest='grid_n', type=int, help="Price grid points (oracle and price curves)")
    common.add_argument('--alpha-grid-n', dest='alpha_grid_n', type=int, help="Fee grid points")
    common.add_argument('--tol', type=float, help="Oracle payoff slack")
    common.add_argument('--seed', type=int, help="Seed for random draws")
    common.add_argument('--format', type=str, choices=['json', 'csv'], help="Output format")
    common.add_argument('--out', type=str, help="Output file (default stdout)")
    common.add_argument('--verbose', action='store_true', help="Debug logging")

    parser = argparse.ArgumentParser(description="Solve the shared-revenue Bertrand pricing game.")
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('report', parents=[common], help="Scenario report (JSON)")

    region = sub.add_parser('region-map', parents=[common], help="Outcome labels over a cost x fee lattice")
    region.add_argument('--axis', choices=AXES, default='cs', help="Cost varied along x (default cs)")
    region.add_argument('--points', type=int, help=f"Points per axis (default {REGION_MAP_POINTS})")

    curves = sub.add_parser('payoff-curves', parents=[common], help="Payoff curves over price or fee")
    curves.add_argument('--mode', choices=['price', 'alpha'], help="Default: price when --alpha is given")

    sweep = sub.add_parser('fee-sweep', parents=[common], help="Optimal fees and bounds over a cost lattice")
    sweep.add_argument('--axis', choices=AXES, default='cs', help="Cost varied along x (default cs)")
    sweep.add_argument('--points', type=int, help=f"Lattice points (default {FEE_SWEEP_POINTS})")

    verify = sub.add_parser('verify', parents=[common], help="Cross-check against the grid oracle")
    verify.add_argument('--draws', type=int, default=VERIFY_DRAWS,
                        help=f"Random parameter draws when costs are not fixed (default {VERIFY_DRAWS})")
    verify.add_argument('--perturb-fee', dest='perturb_fee', type=float, default=0.0,
                        help="Shift every analytic threshold fee (fault injection)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)

    try:
        return run_command(args)
    except ValueError as e:
        # ConfigError and every other model-input error
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"An unexpected error occurred: {e}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == '__main__':
    sys.exit(main())
