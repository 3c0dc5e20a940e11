"""Exception hierarchy shared by all slrot modules."""


class SLRotError(Exception):
    """Base class for library errors."""


class AmbiguousFrequency(SLRotError):
    pass


class BaseMismatch(SLRotError):
    pass


class StepLimitExceeded(SLRotError):
    pass


class NonFiniteState(SLRotError):
    pass


class HorizonExceeded(SLRotError):
    """Adaptive horizon reached ``X_max`` before the target error.

    ``best`` carries the last estimate so callers can keep it.
    """

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


class NoLabelWithinTol(SLRotError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NotDecayed(SLRotError):
    pass


class WronskianVanished(SLRotError):
    pass


class NotPeriodic(SLRotError):
    pass


class ParseError(SLRotError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PositivityError(SLRotError):
    def __init__(self, message, section):
        super().__init__(message)
        self.section = section


class DimensionError(ParseError):
    pass
