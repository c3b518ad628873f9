"""Exception hierarchy for the emholder package."""

from __future__ import annotations


class EmHolderError(Exception):
    """Base class for all package errors."""


class AlignmentError(EmHolderError, ValueError):
    """A time or partition point does not lie on the finest lattice grid."""


class ParseError(EmHolderError, ValueError):
    """Expression source could not be parsed.

    Attributes:
        offset: byte offset into the source at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(EmHolderError, ArithmeticError):
    """Expression evaluation produced a non-finite value."""


class DivergedPathError(EmHolderError, RuntimeError):
    """An Euler path produced NaN/Inf values and divergence is not tolerated."""


class EstimationError(EmHolderError, RuntimeError):
    """A Monte Carlo estimate could not be formed (e.g. diverged samples)."""


class QuadratureError(EmHolderError, RuntimeError):
    """Gauss-Hermite quadrature failed to converge within the node budget."""


class PremiseError(EmHolderError, ValueError):
    """The hypothesis of a verified inequality fails on the sampled data."""

    def __init__(self, message: str, where: float | None = None):
        if where is not None:
            message = f"{message} (first violation at t={where!r})"
        super().__init__(message)
        self.where = where


class ExactSolutionUnavailable(EmHolderError, ValueError):
    """The model carries no closed-form solution."""


class ConfigError(EmHolderError, ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, message: str, field: str | None = None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
