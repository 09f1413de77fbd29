"""Exception hierarchy.

Validation problems map to CLI exit code 2, numeric failures to exit code 3.
"""

from __future__ import annotations


class MinskyError(Exception):
    """Base class for all package errors."""


class ValidationError(MinskyError, ValueError):
    """Input violates a precondition or schema."""


class MissingFieldError(ValidationError):
    def __init__(self, field: str, firm_id: object = None):
        self.field = field
        self.firm_id = firm_id
        where = f" (firm {firm_id})" if firm_id is not None else ""
        super().__init__(f"missing value for field {field!r}{where}")


class InsufficientDataError(ValidationError):
    """Too few usable points for a fit or statistic."""


class UnderdeterminedError(ValidationError):
    """The data cannot identify the requested parameters."""


class UndefinedRatioError(ValidationError):
    """A ratio or logarithm has a zero or empty denominator."""


class NumericError(MinskyError, ArithmeticError):
    """A numeric procedure failed (non-convergence, divergence)."""


class NonConvergenceError(NumericError):
    pass


class SupercriticalError(NumericError):
    """Density reached the critical value: the failure count diverges."""

    def __init__(self, density: float, critical: float):
        self.density = density
        self.critical = critical
        super().__init__(
            f"supercritical: density {density:g} >= critical density {critical:g}"
        )
