"""
Defines the normalized demand curves used by the pricing game.

A curve maps a unitless price p in [0, 1] to a unitless quantity q(p) in
[0, 1] with q(0) = 1 and q(1) = 0. Raw tables in currency and unit
quantities are brought onto this square by `normalize`.
"""
import logging
from collections import namedtuple

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator

from constants import ENDPOINT_TOL, PROBE_GRID_POINTS, LINEAR_SAMPLE_POINTS
from errors import NonNormalizable, OutOfDomain

logger = logging.getLogger(__name__)

# A demand table in raw units, before normalization
RawDemand = namedtuple('RawDemand', ['p_max', 'q_at_zero', 'samples'])

# One failed invariant and the sample (or probe) indices that witness it
DemandViolation = namedtuple('DemandViolation', ['invariant', 'indices', 'detail'])


class DemandCurve:
    """
    Base class for normalized demand curves.

    Subclasses implement `_quantity` and `_slope` on numpy arrays already
    known to lie in [0, 1].
    """
    kind = None

    def quantity(self, p):
        """Demand at price p (scalar or array)."""
        arr = _as_unit_prices(p)
        out = self._quantity(arr)
        return float(out) if np.ndim(p) == 0 else out

    def slope(self, p):
        """First derivative q'(p) (scalar or array)."""
        arr = _as_unit_prices(p)
        out = self._slope(arr)
        return float(out) if np.ndim(p) == 0 else out

    @property
    def samples(self):
        return ()

    def _quantity(self, p):
        raise NotImplementedError

    def _slope(self, p):
        raise NotImplementedError


class LinearDemand(DemandCurve):
    """The running example q(p) = 1 - p."""
    kind = 'linear'

    def _quantity(self, p):
        return 1.0 - p

    def _slope(self, p):
        return -np.ones_like(p)

    def __repr__(self):
        return "LinearDemand()"

    def __eq__(self, other):
        return isinstance(other, LinearDemand)

    def __hash__(self):
        return hash(self.kind)


class TabulatedDemand(DemandCurve):
    """
    A demand curve given by normalized samples, interpolated with a monotone
    piecewise cubic (PCHIP). PCHIP keeps monotone data monotone; concavity of
    the interpolant is checked by `validate` on a dense probe grid.

    Args:
        samples (list[tuple[float, float]]): (price, quantity) pairs with
            strictly increasing prices spanning [0, 1].

    Raises:
        NonNormalizable: If prices do not span [0, 1] or are not increasing.
    """
    kind = 'tabulated'

    def __init__(self, samples):
        prices = np.array([s[0] for s in samples], dtype=float)
        quantities = np.array([s[1] for s in samples], dtype=float)
        if prices.size < 3:
            raise NonNormalizable(f"A tabulated curve needs at least 3 samples, got {prices.size}.")
        if np.any(np.diff(prices) <= 0):
            raise NonNormalizable("Sample prices must be strictly increasing.")
        if abs(prices[0]) > ENDPOINT_TOL or abs(prices[-1] - 1.0) > ENDPOINT_TOL:
            raise NonNormalizable(f"Sample prices must span [0, 1], got [{prices[0]}, {prices[-1]}].")
        prices[0], prices[-1] = 0.0, 1.0

        self._prices = prices
        self._quantities = quantities
        self._interp = PchipInterpolator(prices, quantities, extrapolate=False)
        self._deriv = self._interp.derivative()

    @property
    def samples(self):
        return tuple(zip(self._prices.tolist(), self._quantities.tolist()))

    def _quantity(self, p):
        return np.clip(self._interp(p), 0.0, None)

    def _slope(self, p):
        return self._deriv(p)

    def __repr__(self):
        return f"TabulatedDemand(n_samples={self._prices.size})"


def _as_unit_prices(p):
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise OutOfDomain(f"Price must lie in [0, 1], got {p}.")
    return arr


def evaluate(curve, p):
    """
    Evaluates a normalized demand curve.

    Args:
        curve (DemandCurve): The curve.
        p (float or np.ndarray): Price(s) in [0, 1].

    Returns:
        float or np.ndarray: Quantity in [0, 1].

    Raises:
        OutOfDomain: If any price lies outside [0, 1].
    """
    return curve.quantity(p)


def normalize(raw):
    """
    Maps a raw demand table onto the unit square: p = p_raw / p_max and
    q = q_raw / q(0).

    Tables whose normalized samples lie on q = 1 - p come back as the exact
    linear curve.

    Raises:
        NonNormalizable: If the table does not reach zero demand at p_max or
            quantities are not strictly decreasing.
    """
    if raw.p_max <= 0 or raw.q_at_zero <= 0:
        raise NonNormalizable(f"p_max and q(0) must be positive, got p_max={raw.p_max}, "
                              f"q(0)={raw.q_at_zero}.")

    samples = sorted((float(p), float(q)) for p, q in raw.samples)
    if any(p < 0 or p > raw.p_max * (1 + ENDPOINT_TOL) for p, _ in samples):
        raise NonNormalizable(f"Raw prices must lie in [0, {raw.p_max}].")
    if not samples or samples[0][0] > 0:
        samples.insert(0, (0.0, float(raw.q_at_zero)))

    prices = np.array([s[0] for s in samples]) / raw.p_max
    quantities = np.array([s[1] for s in samples]) / raw.q_at_zero

    if abs(prices[-1] - 1.0) > ENDPOINT_TOL or abs(quantities[-1]) > ENDPOINT_TOL:
        end_q = quantities[-1] * raw.q_at_zero
        raise NonNormalizable(f"Demand at p_max must be 0, got q({samples[-1][0]})={end_q}.")
    if abs(quantities[0] - 1.0) > ENDPOINT_TOL:
        raise NonNormalizable(f"First sample quantity {samples[0][1]} does not match q(0)={raw.q_at_zero}.")
    bad = np.flatnonzero(np.diff(quantities) >= 0)
    if bad.size:
        raise NonNormalizable(f"Quantities must be strictly decreasing; violated after sample indices {bad.tolist()}.")

    quantities[-1] = 0.0
    if np.allclose(quantities, 1.0 - prices, rtol=0.0, atol=ENDPOINT_TOL):
        logger.info("Normalized demand table is linear; using q(p) = 1 - p.")
        return LinearDemand()
    logger.info("Normalized demand table with %d samples.", prices.size)
    return TabulatedDemand(list(zip(prices, quantities)))


def denormalize(curve, p_max, q_at_zero):
    """Inverse of `normalize` on the curve's samples (linear curves are sampled)."""
    if curve.kind == 'linear':
        prices = np.linspace(0.0, 1.0, LINEAR_SAMPLE_POINTS)
        pairs = zip(prices, curve.quantity(prices))
    else:
        pairs = curve.samples
    samples = [(p * p_max, q * q_at_zero) for p, q in pairs]
    return RawDemand(p_max=p_max, q_at_zero=q_at_zero, samples=samples)


def _second_differences(x, y):
    """Second divided differences of y(x) on consecutive triples."""
    return ((y[2:] - y[1:-1]) / (x[2:] - x[1:-1]) - (y[1:-1] - y[:-2]) / (x[1:-1] - x[:-2])) / (x[2:] - x[:-2])


def validate(curve):
    """
    Checks the shape assumptions on a normalized curve.

    Returns:
        list[DemandViolation]: One entry per violated invariant; empty means valid.
    """
    report = []
    if curve.kind == 'linear':
        return report

    prices = np.array([s[0] for s in curve.samples])
    quantities = np.array([s[1] for s in curve.samples])

    # --- Normalization endpoints ---
    if abs(quantities[0] - 1.0) > ENDPOINT_TOL:
        report.append(DemandViolation('normalization', [0], f"q(0)={quantities[0]}"))
    if abs(quantities[-1]) > ENDPOINT_TOL:
        report.append(DemandViolation('normalization', [len(quantities) - 1], f"q(1)={quantities[-1]}"))
    if np.any(quantities < 0):
        report.append(DemandViolation('nonnegative', np.flatnonzero(quantities < 0).tolist(), "negative quantity"))

    # --- Strictly decreasing samples ---
    for i in np.flatnonzero(np.diff(quantities) >= 0):
        report.append(DemandViolation('decreasing', [int(i), int(i) + 1],
                                      f"q({prices[i]:g})={quantities[i]:g} <= q({prices[i + 1]:g})={quantities[i + 1]:g}"))

    # --- Strict concavity of q and of revenue p*q ---
    for i in np.flatnonzero(_second_differences(prices, quantities) >= 0):
        report.append(DemandViolation('concave', [int(i), int(i) + 1, int(i) + 2],
                                      "second divided difference of q is not negative"))
    for i in np.flatnonzero(_second_differences(prices, prices * quantities) >= 0):
        report.append(DemandViolation('revenue_concave', [int(i), int(i) + 1, int(i) + 2],
                                      "second divided difference of p*q is not negative"))

    # --- The interpolant on the probe grid ---
    probe = np.linspace(0.0, 1.0, PROBE_GRID_POINTS)
    q_probe = curve.quantity(probe)
    steps = np.flatnonzero(np.diff(q_probe) >= 0)
    if steps.size:
        report.append(DemandViolation('interpolant_decreasing', steps[:10].tolist(),
                                      f"{steps.size} non-decreasing probe steps"))
    bends = np.flatnonzero(_second_differences(probe, q_probe) > 1e-9)
    if bends.size:
        report.append(DemandViolation('interpolant_concave', bends[:10].tolist(),
                                      f"{bends.size} convex probe triples"))

    for violation in report:
        logger.debug("Demand curve violation: %s", violation)
    return report


def load_demand_csv(csv_path, p_max):
    """
    Reads a raw demand table with columns `price,quantity`.

    q(0) is taken from the first row's quantity.
    """
    table = pd.read_csv(csv_path)
    missing = {'price', 'quantity'} - set(table.columns)
    if missing:
        raise NonNormalizable(f"Demand table '{csv_path}' is missing columns {sorted(missing)}.")
    table = table.sort_values('price')
    samples = list(zip(table['price'].astype(float), table['quantity'].astype(float)))
    return RawDemand(p_max=float(p_max), q_at_zero=float(table['quantity'].iloc[0]), samples=samples)


def create_demand_curve(source='linear', p_max=None):
    """
    Factory function that builds a demand curve from a source description.

    Args:
        source (str): 'linear' or the path of a `price,quantity` CSV table.
        p_max (float, optional): Raw price at which demand vanishes; required
            for CSV tables.

    Returns:
        DemandCurve: A normalized curve.
    """
    builder = DEMAND_SOURCE_MAP.get(source)
    if builder is not None:
        return builder()
    if str(source).lower().endswith('.csv'):
        if p_max is None:
            raise NonNormalizable(f"Demand table '{source}' needs --p-max.")
        return normalize(load_demand_csv(source, p_max))
    raise ValueError(f"Unknown demand source: '{source}'. "
                     f"Available types are: {list(DEMAND_SOURCE_MAP.keys()) + ['<path>.csv']}")


DEMAND_SOURCE_MAP = {
    'linear': LinearDemand,
}
