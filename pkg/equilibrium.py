"""
Nash equilibria of the staying subgame and their refinements.

Equilibria come in three families of price configurations:

    SharedSellerInterval(lo, hi)          both post p in [lo, hi], seller fulfills
    RetailerFixedSellerAbove(p_r, lo, hi) retailer at p_r, seller anywhere in [lo, hi]
    SellerFixedRetailerAbove(p_s, lo, hi) seller at p_s, retailer anywhere in [lo, hi]

`nash_set` lists the unrefined families per regime, `admissible_set` removes
weakly dominated strategies, `pareto_refine` removes the relatively Pareto
dominated family and `collapse_outcomes` turns what is left into
(price interval, fulfiller) outcomes. `refined_outcomes` gives the same
outcomes as labelled closed-form rows; `derivation_mismatches` compares the two.
"""
import logging
from collections import namedtuple

from constants import PRICE_TOL, PAYOFF_TOL, FEE_TOL, OUTCOME_MATCH_TOL
from fees import threshold_fees, cost_case
from payoff import pi_rr, pi_rs, pi_ss, joint_payoffs
from prices import key_prices

logger = logging.getLogger(__name__)

UNREFINED = 'unrefined'
ADMISSIBLE = 'admissible'
ADMISSIBLE_PARETO = 'admissible_pareto'

SharedSellerInterval = namedtuple('SharedSellerInterval', ['lo', 'hi', 'status'],
                                  defaults=[UNREFINED])
RetailerFixedSellerAbove = namedtuple('RetailerFixedSellerAbove', ['p_r', 'seller_lo', 'seller_hi', 'status'],
                                      defaults=[UNREFINED])
SellerFixedRetailerAbove = namedtuple('SellerFixedRetailerAbove', ['p_s', 'retailer_lo', 'retailer_hi', 'status'],
                                      defaults=[UNREFINED])

Outcome = namedtuple('Outcome', ['price_lo', 'price_hi', 'fulfiller', 'label'], defaults=[None])

NashCheck = namedtuple('NashCheck', ['is_nash', 'violations'])

# Everything the regime logic needs for one parameter set
SubgameContext = namedtuple('SubgameContext', ['params', 'prices', 'fees', 'case', 'psstar_within_pdagger'])

RETAILER = 'retailer'
SELLER = 'seller'


def analyse(params, fees=None):
    """
    Collects key prices, threshold fees, the cost case and the p_s* <= p+ guard.

    Args:
        params (GameParams): Game parameters.
        fees (ThresholdFees, optional): Precomputed fees for the same costs and
            curve; fee sweeps pass them to avoid recomputing.
    """
    fees = threshold_fees(params.curve, params.c_r, params.c_s) if fees is None else fees
    prices = key_prices(params)
    # p_s* <= p+ is equivalent to pi_rs(p_s*) >= pi_rr(p_r*)
    within = pi_rs(params, prices.p_sstar) >= pi_rr(params, prices.p_rstar) - PAYOFF_TOL
    return SubgameContext(params, prices, fees, cost_case(fees, params.c_s), within)


def _between(alpha, lo, hi):
    return lo - FEE_TOL <= alpha <= hi + FEE_TOL


def _shared(lo, hi, status=UNREFINED):
    """A shared interval, or None if empty; near-empty intervals collapse to a point."""
    if hi < lo - PRICE_TOL:
        return None
    if hi < lo:
        hi = lo
    return SharedSellerInterval(lo, hi, status)


def _clip_range(lo, hi):
    if hi < lo - PRICE_TOL:
        return None
    return (lo, max(lo, hi))


# --- Nash conditions ---

def _tie_payoffs(params, p, fulfiller):
    if fulfiller == SELLER:
        return joint_payoffs(params, p, p, beta=0.0)
    if fulfiller == RETAILER:
        return joint_payoffs(params, p, p, beta=1.0)
    if fulfiller == 'split':
        return joint_payoffs(params, p, p)
    raise ValueError(f"Unknown tie fulfiller: '{fulfiller}'. "
                     f"Available types are: {[SELLER, RETAILER, 'split']}")


def is_nash(params, p_r, p_s, fulfiller=SELLER, prices=None):
    """
    Checks whether (p_r, p_s) is a Nash equilibrium using the analytic
    deviation conditions:

        I    retailer gains by lowering its price
        II   retailer gains by raising its price
        III  seller gains by lowering its price
        IV   seller gains by raising its price

    Suprema over half-open deviation intervals follow from unimodality, e.g.
    sup over p' < x of pi_rr is pi_rr(min(x, p_r*)).

    Args:
        params (GameParams): Game parameters.
        p_r (float): Retailer price in [0, 1].
        p_s (float): Seller price in [0, 1].
        fulfiller (str): Who serves a tie, 'seller' (default), 'retailer' or
            'split' (shares beta / 1 - beta from params).
        prices (KeyPrices, optional): Precomputed key prices.

    Returns:
        NashCheck: (is_nash, list of violated-condition messages).
    """
    prices = key_prices(params) if prices is None else prices
    p_rstar, p_sstar = prices.p_rstar, prices.p_sstar

    if p_r == p_s:
        u_r, u_s = _tie_payoffs(params, p_r, fulfiller)
    else:
        u_r, u_s = joint_payoffs(params, p_r, p_s)

    lower_r, raise_r, lower_s, raise_s = [], [], [], []
    if p_r < p_s:
        if p_r > 0:
            lower_r.append(pi_rr(params, min(p_r, p_rstar)))
        raise_r.append(pi_rr(params, min(max(p_rstar, p_r), p_s)))
        raise_r.append(joint_payoffs(params, p_s, p_s)[0])
        if p_s < 1:
            raise_r.append(pi_rs(params, p_s))
        if p_r > 0:
            lower_s.append(pi_ss(params, min(p_r, p_sstar)))
        lower_s.append(joint_payoffs(params, p_r, p_r)[1])
        raise_s.append(0.0)
    elif p_s < p_r:
        if p_s > 0:
            lower_r.append(pi_rr(params, min(p_s, p_rstar)))
        lower_r.append(joint_payoffs(params, p_s, p_s)[0])
        raise_r.append(pi_rs(params, p_s))
        if p_s > 0:
            lower_s.append(pi_ss(params, min(p_s, p_sstar)))
        raise_s.append(pi_ss(params, min(max(p_sstar, p_s), p_r)))
        raise_s.append(joint_payoffs(params, p_r, p_r)[1])
        if p_r < 1:
            raise_s.append(0.0)
    else:
        p = p_r
        if p > 0:
            lower_r.append(pi_rr(params, min(p, p_rstar)))
            lower_s.append(pi_ss(params, min(p, p_sstar)))
        if p < 1:
            raise_r.append(pi_rs(params, p))
            raise_s.append(0.0)

    violations = []
    checks = (('I', 'retailer', 'lowering', lower_r, u_r),
              ('II', 'retailer', 'raising', raise_r, u_r),
              ('III', 'seller', 'lowering', lower_s, u_s),
              ('IV', 'seller', 'raising', raise_s, u_s))
    for tag, player, move, candidates, current in checks:
        if candidates and max(candidates) > current + PAYOFF_TOL:
            gain = max(candidates) - current
            violations.append(f"{tag}: {player} gains {gain:.3g} by {move} its price")
    return NashCheck(not violations, violations)


# --- Unrefined equilibria ---

def nash_set(params, context=None):
    """
    Unrefined Nash equilibrium families for one parameter set.

    Row guards are closed on both sides, so a fee on a regime boundary
    returns the families of both neighbouring regimes.

    Returns:
        list: Equilibrium families with status 'unrefined'.
    """
    ctx = analyse(params) if context is None else context
    kp, tf, alpha = ctx.prices, ctx.fees, params.alpha
    within = ctx.psstar_within_pdagger
    pdagger = kp.p_dagger
    families = []

    if ctx.case == 'i':
        shared_rind = _between(alpha, -float('inf'), tf.alpha_sstar)
        # merged rows: p_s* <= p_r* needs no p+ condition; past alpha_opt it does
        seller_fixed = (_between(alpha, tf.alpha_sstar, tf.alpha_opt)
                        or (_between(alpha, tf.alpha_opt, tf.alpha_sdagger) and within))
        shared_dagger = _between(alpha, tf.alpha_opt, tf.alpha_sdagger) and not within
    else:
        shared_rind = _between(alpha, -float('inf'), tf.alpha_rdagger)
        seller_fixed = _between(alpha, tf.alpha_rdagger, tf.alpha_sdagger) and within
        shared_dagger = _between(alpha, tf.alpha_rdagger, tf.alpha_sdagger) and not within

    if shared_rind:
        families.append(_shared(kp.p_sind, min(kp.p_rind, 1.0)))
    if seller_fixed:
        families.append(SellerFixedRetailerAbove(kp.p_sstar, kp.p_sstar, 1.0))
        families.append(_shared(kp.p_sind, kp.p_sstar))
    if shared_dagger and pdagger is not None:
        families.append(_shared(kp.p_sind, pdagger))
    if _between(alpha, tf.alpha_rstar, float('inf')) and pdagger is not None:
        families.append(RetailerFixedSellerAbove(kp.p_rstar, pdagger, 1.0))

    families = [f for f in families if f is not None]
    logger.debug("Nash families at alpha=%g (case %s): %s", alpha, ctx.case, families)
    return families


# --- Admissibility ---

def admissible_strategies(params, context=None):
    """
    Price ranges of strategies that are not weakly dominated.

    Returns:
        tuple: ((retailer_lo, retailer_hi), (seller_lo, seller_hi)).
    """
    ctx = analyse(params) if context is None else context
    kp = ctx.prices
    retailer = (min(kp.p_rind, kp.p_rstar), min(max(kp.p_rind, kp.p_rstar), 1.0))
    if kp.p_sind >= 1.0 - PRICE_TOL:
        # every price below 1 loses money for the seller; p_s = 1 weakly dominates
        seller = (1.0, 1.0)
    else:
        seller = (kp.p_sind, kp.p_sstar)
    return retailer, seller


def admissible_set(params, context=None):
    """
    Nash families restricted to admissible strategies of both players.
    """
    ctx = analyse(params) if context is None else context
    (r_lo, r_hi), (s_lo, s_hi) = admissible_strategies(params, ctx)
    out = []
    for family in nash_set(params, ctx):
        if isinstance(family, SharedSellerInterval):
            narrowed = _shared(max(family.lo, r_lo, s_lo), min(family.hi, r_hi, s_hi), ADMISSIBLE)
            if narrowed is not None:
                out.append(narrowed)
        elif isinstance(family, RetailerFixedSellerAbove):
            rng = _clip_range(max(family.seller_lo, s_lo), min(family.seller_hi, s_hi))
            if r_lo - PRICE_TOL <= family.p_r <= r_hi + PRICE_TOL and rng is not None:
                out.append(RetailerFixedSellerAbove(family.p_r, rng[0], rng[1], ADMISSIBLE))
        else:
            rng = _clip_range(max(family.retailer_lo, r_lo), min(family.retailer_hi, r_hi))
            if s_lo - PRICE_TOL <= family.p_s <= s_hi + PRICE_TOL and rng is not None:
                out.append(SellerFixedRetailerAbove(family.p_s, rng[0], rng[1], ADMISSIBLE))
    return out


# --- Pareto refinement and outcomes ---

def pareto_refine(params, families, context=None):
    """
    Drops retailer-fulfilled families whose payoffs (pi_rr(p_r), 0) are
    Pareto dominated by a seller-fulfilled equilibrium in the same set: one
    that gives the retailer at least as much and the seller strictly more.
    """
    ctx = analyse(params) if context is None else context
    pdagger = ctx.prices.p_dagger

    seller_points = []
    for family in families:
        if isinstance(family, SharedSellerInterval):
            p = family.hi if pdagger is None else min(family.hi, pdagger)
            if p >= family.lo - PRICE_TOL:
                seller_points.append(max(p, family.lo))
        elif isinstance(family, SellerFixedRetailerAbove):
            seller_points.append(family.p_s)

    kept = []
    for family in families:
        if isinstance(family, RetailerFixedSellerAbove):
            target = pi_rr(params, family.p_r)
            dominated = any(pi_rs(params, p) >= target - PAYOFF_TOL and pi_ss(params, p) > PAYOFF_TOL
                            for p in seller_points)
            if dominated:
                logger.debug("Removing Pareto-dominated family %s", family)
                continue
        kept.append(family._replace(status=ADMISSIBLE_PARETO))
    return kept


def collapse_outcomes(families):
    """
    Maps equilibrium families to outcomes (price interval, fulfiller),
    merging seller intervals that touch.
    """
    seller, retailer = [], []
    for family in families:
        if isinstance(family, SharedSellerInterval):
            seller.append((family.lo, family.hi))
        elif isinstance(family, SellerFixedRetailerAbove):
            seller.append((family.p_s, family.p_s))
        else:
            retailer.append(family.p_r)
    return _merged_outcomes(seller, retailer)


def merge_outcome_rows(rows):
    """Unlabelled outcomes with touching seller rows merged (boundary fees give two rows)."""
    seller = [(o.price_lo, o.price_hi) for o in rows if o.fulfiller == SELLER]
    retailer = [o.price_lo for o in rows if o.fulfiller == RETAILER]
    return _merged_outcomes(seller, retailer)


def _merged_outcomes(seller, retailer):
    merged = []
    for lo, hi in sorted(seller):
        if merged and lo <= merged[-1][1] + PRICE_TOL:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    outcomes = [Outcome(lo, hi, SELLER) for lo, hi in merged]
    for p in sorted(set(retailer)):
        if not any(abs(p - o.price_lo) <= PRICE_TOL for o in outcomes if o.fulfiller == RETAILER):
            outcomes.append(Outcome(p, p, RETAILER))
    return outcomes


def refined_outcomes(params, context=None):
    """
    Equilibrium outcomes after admissibility and Pareto refinement.

    Case i (c_s <= c_sstar):
        alpha <= alpha_sstar                    (p_rind, s)      prind_s
        alpha_sstar <= alpha <= alpha_opt       (p_s*, s)        psstar_s
        alpha_opt <= alpha <= alpha_sdagger     continuum, s     continuum_s
        alpha >= alpha_sdagger                  (p_r*, r)        prstar_r
    Case ii:
        alpha <= alpha_rdagger                  (p_rind, s)
        alpha_rdagger <= alpha <= alpha_sdagger continuum, s
        alpha >= alpha_sdagger                  (p_r*, r)

    The continuum is [max{p_r*, p_sind}, min{p_s*, p+}].

    Returns:
        list[Outcome]: Rows in increasing-fee order; two rows on a boundary.
    """
    ctx = analyse(params) if context is None else context
    kp, tf, alpha = ctx.prices, ctx.fees, params.alpha

    if ctx.case == 'i':
        first_end, middle = tf.alpha_sstar, (tf.alpha_sstar, tf.alpha_opt)
        continuum_from = tf.alpha_opt
    else:
        first_end, middle = tf.alpha_rdagger, None
        continuum_from = tf.alpha_rdagger

    rows = []
    if _between(alpha, -float('inf'), first_end):
        rows.append(Outcome(kp.p_rind, kp.p_rind, SELLER, 'prind_s'))
    if middle is not None and _between(alpha, *middle):
        rows.append(Outcome(kp.p_sstar, kp.p_sstar, SELLER, 'psstar_s'))
    if _between(alpha, continuum_from, tf.alpha_sdagger):
        lo = max(kp.p_rstar, kp.p_sind)
        hi = kp.p_sstar if kp.p_dagger is None else min(kp.p_sstar, kp.p_dagger)
        rows.append(Outcome(lo, max(lo, hi), SELLER, 'continuum_s'))
    if _between(alpha, tf.alpha_sdagger, float('inf')):
        rows.append(Outcome(kp.p_rstar, kp.p_rstar, RETAILER, 'prstar_r'))
    return rows


def derived_outcomes(params, context=None):
    """
    Outcomes derived from the Nash families: admissible_set, then
    pareto_refine, then collapse_outcomes. Carries no region labels.
    """
    ctx = analyse(params) if context is None else context
    return collapse_outcomes(pareto_refine(params, admissible_set(params, ctx), ctx))


def derivation_mismatches(params, context=None, tol=OUTCOME_MATCH_TOL):
    """
    Compares the labelled rows of refined_outcomes with the outcomes derived
    from the refined Nash families.

    Returns:
        list[str]: Mismatch descriptions (empty when both agree within tol).
    """
    ctx = analyse(params) if context is None else context
    closed = merge_outcome_rows(refined_outcomes(params, ctx))
    derived = derived_outcomes(params, ctx)

    def fmt(outcomes):
        return ", ".join(f"{o.fulfiller} [{o.price_lo:.6f}, {o.price_hi:.6f}]" for o in outcomes)

    if [o.fulfiller for o in closed] != [o.fulfiller for o in derived]:
        return [f"outcome rows ({fmt(closed)}) differ from refined families ({fmt(derived)})"]
    problems = []
    for row, found in zip(closed, derived):
        if abs(row.price_lo - found.price_lo) > tol or abs(row.price_hi - found.price_hi) > tol:
            problems.append(f"{row.fulfiller} outcome [{row.price_lo:.6f}, {row.price_hi:.6f}] differs from "
                            f"refined family [{found.price_lo:.6f}, {found.price_hi:.6f}]")
    return problems


def outcome_label(params, context=None):
    """Label of the first outcome row (the regime a fee belongs to)."""
    return refined_outcomes(params, context)[0].label
