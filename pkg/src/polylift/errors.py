"""Exception classes shared across the package."""


class DivisionByZero(ZeroDivisionError):
    pass


class NotOrdinary(ValueError):
    """A polynomial with negative exponents was given where z^0.. is required."""


class OffCircle(ValueError):
    pass


class ZeroPolynomial(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class BadArity(ValueError):
    pass


class SingularScale(ZeroDivisionError):
    pass


class BadBand(IndexError):
    pass


class ModeUnsupported(ValueError):
    pass


class GridNotDivisible(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class BandArityMismatch(ValueError):
    pass


class FactorizationError(ArithmeticError):
    """Base class for failures of a factorization run.

    The CLI maps every subclass to exit status 2 and prints the class name.
    """


class NotSL(FactorizationError):
    pass


class InconsistentQuotient(FactorizationError):
    pass


class NonTerminating(FactorizationError):
    pass


class DegenerateRow(FactorizationError):
    pass
