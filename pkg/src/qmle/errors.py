"""Exception hierarchy shared by every qmle module."""


class QmleError(Exception):
    """Base class for all errors raised by qmle."""


class DimensionError(QmleError, ValueError):
    pass


class NumericError(QmleError, ArithmeticError):
    pass


class NotPositiveDefinite(NumericError):
    pass


class NotNormalizable(NumericError):
    pass


class InvariantViolation(NumericError):
    """A property guaranteed by theory failed at runtime (e.g. trace growth)."""


class NonPositiveLikelihood(NumericError):
    """A Born probability tr(M_n rho) was not strictly positive."""

    def __init__(self, index, value):
        self.index = int(index)
        self.value = float(value)
        super().__init__(f"non-positive Born probability {value!r} at element {index}")


class EmptyEnsemble(QmleError, ValueError):
    pass


class NotCommuting(QmleError, ValueError):
    pass


class LineSearchFailed(NumericError):
    pass


class InvalidReturns(QmleError, ValueError):
    pass


class DegenerateAsset(QmleError, ValueError):
    pass


class ValidationError(QmleError, ValueError):
    pass


class ParseError(QmleError, ValueError):
    pass
