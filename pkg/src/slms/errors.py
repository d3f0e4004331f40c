"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (also a ``ValueError``);
numerical trouble derives from :class:`NumericalError` (also an
``ArithmeticError``).  The CLI maps the two families to distinct exit codes.
"""


class SlmsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SlmsError, ValueError):
    """Problem data violates a structural constraint."""


class BadInterval(ValidationError):
    pass


class EpsilonOutOfRange(ValidationError):
    pass


class DegenerateLeftBC(ValidationError):
    pass


class ZeroTransmission(ValidationError):
    pass


class RhoNotPositive(ValidationError):
    pass


class BadPotentialTable(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class MissingSideFlag(ValidationError):
    pass


class NumericalError(SlmsError, ArithmeticError):
    """A numerical procedure failed or produced an unusable result."""


class ToleranceNotReached(NumericalError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NoSignChange(NumericalError):
    pass


class MaxIterations(NumericalError):
    pass


class NonFiniteValue(NumericalError):
    pass


class IntegratorFailure(NumericalError):
    pass


class ScanRangeExhausted(NumericalError):
    pass


class SuspectedDoubleRoot(NumericalError):
    pass


class DegenerateRatio(NumericalError):
    pass


class NearEigenvaluePole(NumericalError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class MismatchedProvenance(NumericalError):
    pass
