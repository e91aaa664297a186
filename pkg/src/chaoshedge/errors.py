"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and NumericalError (including
SimulationError) to exit code 3.
"""


class ChaosHedgeError(Exception):
    """Base class for package errors."""


class ConfigError(ChaosHedgeError):
    """Invalid model, feature, or experiment configuration."""


class NumericalError(ChaosHedgeError):
    """A numerical routine failed (non-convergence, non-finite values)."""


class SimulationError(NumericalError):
    """Path simulation produced a non-finite state."""
