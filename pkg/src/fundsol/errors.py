"""Exception hierarchy shared by every module."""


class FundsolError(Exception):
    """Base class for all library errors."""


class ConfigError(FundsolError):
    pass


class NumericFailure(FundsolError):
    """Raised when a numerical budget or convergence guarantee cannot be met."""


# symbol
class NonOrthogonal(FundsolError):
    pass


class NonPositiveWeight(FundsolError):
    pass


class NonUnitDirection(FundsolError):
    pass


# rootsys
class NoConvergence(NumericFailure):
    pass


class NotLowerBounded(FundsolError):
    pass


# special
class NegativeArgument(FundsolError):
    pass


class SingularMatrix(FundsolError):
    pass


# testfn
class DegreeOverflow(FundsolError):
    pass


# quad
class UnsupportedDimension(FundsolError):
    pass


class TailNotDecayed(NumericFailure):
    pass


class ErrorBudgetExceeded(NumericFailure):
    pass


class InsufficientNodes(FundsolError):
    pass


class HypothesisViolated(FundsolError):
    pass


# solop
class PathsDisagree(NumericFailure):
    pass


class SurfaceTooClose(FundsolError):
    pass
