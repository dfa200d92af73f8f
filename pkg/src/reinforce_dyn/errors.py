"""Exception hierarchy shared by every module of the package."""


class ReinforceError(Exception):
    """Base class for all package errors."""


class BadDimension(ReinforceError, ValueError):
    pass


class AsymmetricAlpha(ReinforceError, ValueError):
    pass


class LyapunovUnavailable(ReinforceError):
    """Raised when a Lyapunov/entropy quantity is requested for an asymmetric model."""


class BoundaryReference(ReinforceError, ValueError):
    pass


class BoundaryInput(ReinforceError, ValueError):
    pass


class NegativeArgument(ReinforceError, ValueError):
    pass


class StepTooLarge(ReinforceError, ValueError):
    pass


class NonFiniteState(ReinforceError, ArithmeticError):
    pass


class NotAnEquilibrium(ReinforceError, ValueError):
    pass


class WrongShape(ReinforceError, ValueError):
    pass


class NoConvergence(ReinforceError, ArithmeticError):
    pass


class SingularNewtonStep(ReinforceError, ArithmeticError):
    pass


class OutOfRange(ReinforceError, ValueError):
    pass


class NoSmallRoot(ReinforceError, ValueError):
    pass


class NotFoundOnGrid(ReinforceError, LookupError):
    pass


class ConfigError(ReinforceError, ValueError):
    pass
