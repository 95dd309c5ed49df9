"""Exception types raised across the package."""


class AsyncCpucError(Exception):
    """Base class for all package errors."""


class ChannelError(AsyncCpucError, ValueError):
    pass


class NonStochasticRow(ChannelError):
    pass


class NegativeCost(ChannelError):
    pass


class MissingStarRow(ChannelError):
    pass


class LengthMismatch(AsyncCpucError, ValueError):
    pass


class AllCostsInfinite(AsyncCpucError, ValueError):
    pass


class StarNotUsableOrCostly(AsyncCpucError, ValueError):
    pass


class DeltaOutOfRange(AsyncCpucError, ValueError):
    pass


class NonConvergence(AsyncCpucError, ArithmeticError):
    pass


class RejectionBudgetExceeded(AsyncCpucError, RuntimeError):
    pass


class NuOutOfRange(AsyncCpucError, ValueError):
    pass


class NonConvergentSequence(AsyncCpucError, ArithmeticError):
    pass
