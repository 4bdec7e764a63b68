"""
Stores shared numerical tolerances and defaults for the solver.
"""

# Root finding (prices and fees)
ROOT_XTOL = 1e-12
ROOT_MAX_ITER = 200
FEE_SCAN_POINTS = 1000

# Comparisons
PRICE_TOL = 1e-9
PAYOFF_TOL = 1e-9
FEE_TOL = 1e-9
ARGMAX_TIE_TOL = 1e-12
# Closed-form outcome rows against outcomes derived from the refined families
OUTCOME_MATCH_TOL = 1e-7

# Demand curves
ENDPOINT_TOL = 1e-9
PROBE_GRID_POINTS = 10_000
LINEAR_SAMPLE_POINTS = 11

# Fee sweeps
ALPHA_GRID_POINTS = 10_000
GOLDEN_TOL = 1e-10
SWEEP_VALIDATION_DRAWS = 100

# Brute-force oracle
ORACLE_GRID_POINTS = 2001
ORACLE_SLACK = 1e-9
INFINITESIMAL_UNDERCUT = 1e-12

# Model defaults
DEFAULT_BETA = 0.5
DEFAULT_SEED = 20240601

# Output
SCHEMA_VERSION = 1
SIGNIFICANT_DIGITS = 12
REGION_MAP_POINTS = 400

# Region labels used by region maps and payoff curves
REGION_LABELS = {
    'prind_s': "seller fulfills at the retailer's indifference price",
    'psstar_s': "seller fulfills at its optimal price",
    'continuum_s': "seller fulfills inside the continuum selected by rho",
    'prstar_r': "retailer fulfills at its optimal price",
    'infeasible': "cost pair violates 0 < c_s < c_r < 1",
}

# CLI lattices
FEE_SWEEP_POINTS = 50
VERIFY_ALPHA_POINTS = 400
VERIFY_DRAWS = 100
