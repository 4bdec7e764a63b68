"""
Scenario configuration: a JSON file merged with command-line overrides.

File sections (all optional): costs, fee, outside_option, demand, strategy,
grid, output. Keys starting with '_' are comments.
"""
import json
import logging

from constants import (ALPHA_GRID_POINTS, DEFAULT_BETA, DEFAULT_SEED, ORACLE_GRID_POINTS,
                       ORACLE_SLACK)
from demand import create_demand_curve
from errors import ConfigError
from feegame import Market, create_strategy_profile
from oracle import GridSpec, check_grid
from outside import check_delta
from payoff import GameParams, check_costs

logger = logging.getLogger(__name__)

FORMATS = ('json', 'csv')

# (section, key) in the JSON file for every flat setting
FILE_KEYS = {
    'c_r': ('costs', 'c_r'),
    'c_s': ('costs', 'c_s'),
    'alpha': ('fee', 'alpha'),
    'delta': ('outside_option', 'delta'),
    'demand': ('demand', 'source'),
    'p_max': ('demand', 'p_max'),
    'rho': ('strategy', 'rho'),
    'beta': ('strategy', 'beta'),
    'grid_n': ('grid', 'grid_n'),
    'alpha_grid_n': ('grid', 'alpha_grid_n'),
    'tol': ('grid', 'tol'),
    'seed': ('grid', 'seed'),
    'format': ('output', 'format'),
    'out': ('output', 'out'),
}

DEFAULTS = {
    'c_r': None,
    'c_s': None,
    'alpha': None,
    'delta': None,
    'demand': 'linear',
    'p_max': None,
    'rho': 'low',
    'beta': DEFAULT_BETA,
    'grid_n': ORACLE_GRID_POINTS,
    'alpha_grid_n': ALPHA_GRID_POINTS,
    'tol': ORACLE_SLACK,
    'seed': DEFAULT_SEED,
    'format': None,
    'out': None,
}


def load_config_file(config_path):
    """
    Reads a scenario JSON file into flat settings.

    Raises:
        ConfigError: If the file is missing, unparsable or has an unknown section.
    """
    try:
        with open(config_path, 'r') as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Configuration file not found at '{config_path}'.")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Could not parse JSON in configuration file '{config_path}': {e}")

    sections = {section for section, _ in FILE_KEYS.values()}
    unknown = [k for k in raw if not k.startswith('_') and k not in sections]
    if unknown:
        raise ConfigError(f"Unknown configuration section: '{unknown[0]}'. Available types are: {sorted(sections)}")

    flat = {}
    for name, (section, key) in FILE_KEYS.items():
        value = raw.get(section, {}).get(key)
        if value is not None:
            flat[name] = value
    return flat


class ScenarioConfig:
    """
    Resolved settings for one CLI run.

    Args:
        **settings: Flat settings (see FILE_KEYS); missing ones take DEFAULTS.

    Raises:
        ConfigError: If a setting violates a model invariant.
    """
    def __init__(self, **settings):
        unknown = set(settings) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"Unknown setting: '{sorted(unknown)[0]}'. Available types are: {list(DEFAULTS)}")
        values = {**DEFAULTS, **settings}
        for name, value in values.items():
            setattr(self, name, value)
        self._curve = None
        self.validate()

    @classmethod
    def from_sources(cls, config_path=None, overrides=None):
        """Settings from an optional JSON file, with non-None overrides applied on top."""
        settings = load_config_file(config_path) if config_path else {}
        for name, value in (overrides or {}).items():
            if value is not None and name in DEFAULTS:
                settings[name] = value
        return cls(**settings)

    def validate(self):
        try:
            # lattice commands fix only one of the two costs
            if self.c_r is not None and self.c_s is not None:
                check_costs(self.c_r, self.c_s)
            if self.alpha is not None and not 0.0 < self.alpha < 1.0:
                raise ConfigError(f"0 < alpha < 1 violated (alpha={self.alpha}).")
            if not 0.0 <= self.beta <= 1.0:
                raise ConfigError(f"0 <= beta <= 1 violated (beta={self.beta}).")
            if self.delta is not None and self.c_r is not None and self.c_s is not None:
                check_delta(self.c_r, self.c_s, self.delta)
            if self.alpha_grid_n < 2:
                raise ConfigError(f"alpha_grid_n >= 2 violated (alpha_grid_n={self.alpha_grid_n}).")
            check_grid(self.grid())
            if self.format is not None and self.format not in FORMATS:
                raise ConfigError(f"Unknown output format: '{self.format}'. Available types are: {list(FORMATS)}")
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def require_costs(self, command, *names):
        """Raises ConfigError unless the named costs (default both) are set."""
        for name in names or ('c_r', 'c_s'):
            if getattr(self, name) is None:
                flag = '--cr' if name == 'c_r' else '--cs'
                raise ConfigError(f"'{command}' needs {name}: give {flag} or costs.{name}.")

    def require_alpha(self, command):
        if self.alpha is None:
            raise ConfigError(f"'{command}' needs a fee: give --alpha or fee.alpha.")

    def ignore_alpha(self, command):
        """Fee-game commands choose alpha themselves."""
        if self.alpha is not None:
            logger.info("'%s' optimizes the fee; ignoring the fixed alpha=%g.", command, self.alpha)

    def curve(self):
        """The demand curve, built once per scenario."""
        if self._curve is None:
            self._curve = create_demand_curve(self.demand, self.p_max)
        return self._curve

    def market(self, c_r=None, c_s=None):
        """Market for the configured costs, or for explicit ones on a lattice."""
        c_r = self.c_r if c_r is None else c_r
        c_s = self.c_s if c_s is None else c_s
        return Market(c_r, c_s, self.beta, self.curve())

    def params(self):
        return GameParams(self.c_r, self.c_s, self.alpha, self.beta, self.curve())

    def rho_profile(self):
        return create_strategy_profile(self.rho)

    def grid(self):
        return GridSpec(int(self.grid_n), float(self.tol))

    def to_dict(self):
        """Settings as written into reports."""
        return {name: getattr(self, name) for name in DEFAULTS}

    def __repr__(self):
        return f"ScenarioConfig({self.to_dict()})"
