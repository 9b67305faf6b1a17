"""Exception types raised across the package."""


class QMCError(Exception):
    """Base class for all qmcnets errors."""


class IndexOverflow(QMCError, ValueError):
    pass


class NotPrime(QMCError, ValueError):
    pass


class BaseTooSmall(QMCError, ValueError):
    pass


class LengthMismatch(QMCError, ValueError):
    pass


class ShapeMismatch(QMCError, ValueError):
    pass


class ParseError(QMCError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidDigit(ParseError):
    pass


class UnsupportedDegree(QMCError, ValueError):
    pass


class IllConditioned(QMCError, ArithmeticError):
    pass


class NotPowerOfBase(QMCError, ValueError):
    pass


class DimensionMismatch(QMCError, ValueError):
    pass


class BudgetExceeded(QMCError, RuntimeError):
    pass


class NotOddMultiple(QMCError, ValueError):
    pass


class NonPositiveSample(QMCError, ValueError):
    pass


class FitDiverged(QMCError, RuntimeError):
    pass


class UnsupportedDimension(QMCError, ValueError):
    pass


class DomainError(QMCError, ValueError):
    pass
