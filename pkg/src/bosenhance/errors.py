"""Exception hierarchy shared by all modules."""


class BoseEnhanceError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BoseEnhanceError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DivergentValue(BoseEnhanceError, ArithmeticError):
    """The requested quantity is infinite at this point."""


class DivergentOccupation(DivergentValue):
    pass


class NonConvergence(BoseEnhanceError, RuntimeError):
    """An iterative method did not reach its tolerance.

    ``residual`` carries the last error estimate when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoBracket(BoseEnhanceError, ValueError):
    pass


class AmbiguousBranch(BoseEnhanceError, RuntimeError):
    pass


class NormalizationFailure(BoseEnhanceError, RuntimeError):
    pass


class ModelMismatch(BoseEnhanceError, ValueError):
    pass


class DegenerateFit(BoseEnhanceError, ValueError):
    pass


class RangeError(BoseEnhanceError, ValueError):
    pass


class ConfigError(BoseEnhanceError, ValueError):
    """Scenario file could not be parsed or validated.

    ``field`` names the offending key when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
