"""Exception hierarchy shared by every module of the lab."""


class MatherLabError(Exception):
    """Base class for all errors raised by mather_lab."""


class NonFinite(MatherLabError, ValueError):
    pass


class DepthExceeded(MatherLabError, ValueError):
    pass


class RationalDetected(MatherLabError, ValueError):
    pass


class ResonantFrequency(MatherLabError, ValueError):
    pass


class DimensionMismatch(MatherLabError, ValueError):
    pass


class NotCoprime(MatherLabError, ValueError):
    pass


class EmptyWindow(MatherLabError, ValueError):
    pass


class BadDelta(MatherLabError, ValueError):
    pass


class StepTooLarge(MatherLabError, ValueError):
    pass


class NoReturn(MatherLabError, RuntimeError):
    pass


class SizeExceeded(MatherLabError, ValueError):
    pass


class MarginalMismatch(MatherLabError, ValueError):
    pass


class NotConverged(MatherLabError, RuntimeError):
    pass


class LipschitzViolation(MatherLabError, ValueError):
    pass


class Degenerate(MatherLabError, ValueError):
    pass


class BadCase(MatherLabError, ValueError):
    pass


class Aliasing(MatherLabError, ValueError):
    pass


class NearResonance(MatherLabError, ValueError):
    """A small divisor <k, omega> fell below the resonance threshold."""

    def __init__(self, message, k=None, divisor=None):
        super().__init__(message)
        self.k = k
        self.divisor = divisor


class SingularHessian(MatherLabError, ValueError):
    pass


class NonzeroMean(MatherLabError, ValueError):
    pass


class ConfigError(MatherLabError, ValueError):
    pass
