"""Exception hierarchy for the sequential test engine.

Validation errors map to exit code 1, numerical failures to exit code 2.
"""


class SeqTestError(Exception):
    """Base class for all engine errors."""

    exit_code = 2


class ValidationError(SeqTestError, ValueError):
    """Input rejected before any computation."""

    exit_code = 1


class InvalidInstanceError(ValidationError):
    """Problem parameters outside their admissible range."""


class DomainError(ValidationError):
    """Function argument outside the function's domain."""


class KinkPointError(ValidationError):
    """Second derivative requested exactly at a kink of the value function."""


class ConfigError(ValidationError):
    """Malformed configuration file, unknown key or bad value."""


class NumericalError(SeqTestError, RuntimeError):
    """Computation ran but its result cannot be trusted."""

    exit_code = 2


class ThresholdSolverError(NumericalError):
    """Root of a threshold equation is not bracketed or not converged."""


class DecisionNotReachedError(NumericalError):
    """The initial decision was not made before the path was truncated."""


class UnreliableEstimateError(NumericalError):
    """Too many paths hit the horizon before the initial decision."""
