"""Exception hierarchy shared by every hconc module."""


class HconcError(Exception):
    """Base class for all toolkit errors."""


class LengthMismatch(HconcError, ValueError):
    pass


class NonFinite(HconcError, ValueError):
    pass


class NTooLarge(HconcError, ValueError):
    pass


class IndexOutOfRange(HconcError, IndexError):
    pass


class DimensionMismatch(HconcError, ValueError):
    pass


class InvalidExponent(HconcError, ValueError):
    pass


class NoConvergence(HconcError, ArithmeticError):
    pass


class UnsupportedSpace(HconcError, ValueError):
    pass


class NegativeInput(HconcError, ValueError):
    pass


class ExactTooLarge(HconcError, ValueError):
    pass


class ZeroMoment(HconcError, ValueError):
    pass


class Overflow(HconcError, OverflowError):
    pass


class InvalidEpsilon(HconcError, ValueError):
    pass


class DegenerateDraw(HconcError, RuntimeError):
    pass


class DegenerateInput(HconcError, ValueError):
    pass


class PreconditionViolated(HconcError, ValueError):
    pass


class NotLipschitz(HconcError, ValueError):
    pass


class EmptyGrid(HconcError, ValueError):
    pass


class ConfigError(HconcError, ValueError):
    pass


class NotPSD(HconcError, ArithmeticError):
    pass


class ZeroDenominator(HconcError, ZeroDivisionError):
    pass


class InvalidRange(HconcError, ValueError):
    pass


class BudgetExceeded(HconcError, ValueError):
    pass


class OutOfRange(HconcError, ValueError):
    pass
