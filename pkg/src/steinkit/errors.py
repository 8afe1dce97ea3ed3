"""Exception hierarchy.

Two families: :class:`ValidationError` for bad inputs and configuration
(CLI exit code 2) and :class:`NumericFailure` for numerical breakdowns such
as divergent integrals or non positive-definite matrices (exit code 3).
"""


class SteinError(Exception):
    """Base class for every error raised by the library."""


class ValidationError(SteinError, ValueError):
    """Invalid parameter or configuration."""


class NumericFailure(SteinError, ArithmeticError):
    """A numerical procedure could not deliver a trustworthy value."""


class OutsideSupport(ValidationError):
    """Point lies outside the support of the density."""


class SingularPoint(ValidationError):
    """Evaluation at a point where the requested quantity is singular."""


class OutOfUnitSquare(ValidationError):
    pass


class BetaEqualsTwo(ValidationError):
    pass


class DimensionOne(ValidationError):
    pass


class DegreesTooSmall(ValidationError):
    pass


class ZetaEqualsOne(ValidationError):
    pass


class ThetaOutOfRange(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


class SizeMismatch(ValidationError):
    pass


class NotUnivariate(ValidationError):
    pass


class WrongRegime(ValidationError):
    pass


class ZeroSkew(ValidationError):
    pass


class NonSpdDispersion(NumericFailure):
    """Matrix is not symmetric positive definite."""


# the posterior bound names its own input error
NonSpdInput = NonSpdDispersion


class DivergentTail(NumericFailure):
    pass


class QuadratureFailure(NumericFailure):
    pass


class BudgetExceeded(NumericFailure):
    pass


class OdeResidualTooLarge(NumericFailure):
    pass
