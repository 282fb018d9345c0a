"""Exception hierarchy shared by all modules."""


class IsocapError(Exception):
    """Base class for every error raised by this package."""


class RadiusOutOfDomain(IsocapError, ValueError):
    pass


class DerivativeUnavailable(IsocapError):
    pass


class QuadratureError(IsocapError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class LimitNonconvergent(IsocapError, RuntimeError):
    def __init__(self, message, decay_rate=None):
        super().__init__(message)
        self.decay_rate = decay_rate


class NoHorizon(IsocapError):
    pass


class ParameterOutOfFamily(IsocapError, ValueError):
    pass


class ArgumentOutOfRange(IsocapError, ValueError):
    pass


class OutOfRange(IsocapError, ValueError):
    """Evaluation requested outside the tabulated range of a solution."""


class NewtonStall(IsocapError, RuntimeError):
    pass


class FitDivergence(IsocapError, RuntimeError):
    pass


class GridTooCoarse(IsocapError, RuntimeError):
    pass


class InsufficientRange(IsocapError, ValueError):
    pass


class MissingSobolevConstant(IsocapError, ValueError):
    pass


class ConfigError(IsocapError, ValueError):
    pass
