"""Exception types shared across the package.

Validation problems subclass ValueError so callers composing with the wider
ecosystem can keep catching ValueError; numerical failures subclass
ArithmeticError. The command line maps the two families to distinct exit
codes.
"""


class ValidationError(ValueError):
    """Invalid input data or configuration."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed or hit a reliability gate."""


class DegenerateDesignError(NumericalError):
    """Basis design too ill-conditioned for a trustworthy least squares fit."""


class VarianceFloorError(NumericalError):
    """Estimated variance of the centered statistic is not bounded away from zero."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""
