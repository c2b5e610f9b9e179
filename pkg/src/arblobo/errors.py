"""Exception types shared across the package."""


class ArbloboError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(ArbloboError, ValueError):
    pass


class NotSymmetric(ArbloboError, ValueError):
    pass


class NotReversible(ArbloboError, ValueError):
    pass


class DivergenceSuspected(ArbloboError, RuntimeError):
    """Optimizer iterate escaped the allowed ball (e.g. separated logistic data)."""

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class MaxIterExceeded(ArbloboError, RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class Unbounded(ArbloboError, ValueError):
    """Proposal family has no finite density supremum."""


class TooManyStates(ArbloboError, ValueError):
    pass


class InfeasibleMarginals(ArbloboError, ValueError):
    pass


class InsufficientCoverage(ArbloboError, ValueError):
    pass


class ConfigError(ArbloboError, ValueError):
    pass
