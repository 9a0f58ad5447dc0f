"""Exception hierarchy shared by all modules.

Each error class carries the process exit code used by the command line
front end, so library callers and the CLI agree on failure classes.
"""
from __future__ import annotations


class CmcfolError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(CmcfolError, ValueError):
    """Invalid configuration, parameter out of range, malformed input file."""

    exit_code = 2


class ShapeError(ConfigError):
    """Array size does not match the grid it is paired with."""


class DomainError(CmcfolError, ValueError):
    """Evaluation point or surface outside the domain of a metric model."""

    exit_code = 3


class GeometryError(DomainError):
    """A surface lost the radial graph property or became degenerate."""


class NumericError(CmcfolError, ArithmeticError):
    """Singular metric or ill-conditioned linear algebra."""

    exit_code = 4


class OperatorError(NumericError):
    """Operator failed its self-adjointness certificate."""


class SolverError(CmcfolError, RuntimeError):
    """Newton iteration or continuation failed.

    Parameters
    ----------
    message : str
        Human readable reason.
    history : list of float, optional
        Residual history of the failing run.
    trace : object, optional
        Partial continuation trace or foliation table.
    """

    exit_code = 4

    def __init__(self, message, history=None, trace=None):
        super().__init__(message)
        self.history = list(history or [])
        self.trace = trace


class FoliationError(SolverError):
    """Consecutive leaves overlap (non-positive lapse)."""


class NearSingularWarning(UserWarning):
    """Right-hand side has a significant component in a near-kernel."""


class DegeneracyWarning(UserWarning):
    """Eigenvalue band is ambiguous."""
