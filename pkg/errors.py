"""
Exception types raised by the solver. Input problems derive from ValueError,
so callers that only know the builtin types still catch them.
"""


class ModelError(ValueError):
    """Base class for invalid model inputs."""


class NonNormalizable(ModelError):
    """Raw demand data cannot be mapped onto the unit square."""


class OutOfDomain(ModelError):
    """A price was requested outside [0, 1]."""


class InvalidCosts(ModelError):
    """Costs violate 0 < c_s < c_r < 1."""


class InvalidParams(ModelError):
    """Fee or tie split outside its admissible range."""


class InvalidDelta(ModelError):
    """Outside-option cost differential outside (0, c_r - c_s)."""


class InvalidStrategy(ModelError):
    """A strategy profile (rho) cannot be built from the given input."""


class ConfigError(ModelError):
    """Scenario configuration is inconsistent or incomplete."""


class NoStayRegion(RuntimeError):
    """The seller prefers leaving for every fee on the grid."""
