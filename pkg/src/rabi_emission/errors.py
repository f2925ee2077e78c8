"""Exception types raised by the library."""


class RabiEmissionError(Exception):
    """Base class for all library errors."""


class InvalidTruncationError(RabiEmissionError, ValueError):
    pass


class NotHermitianError(RabiEmissionError, ValueError):
    pass


class LabelingError(RabiEmissionError):
    pass


class DimensionMismatchError(RabiEmissionError, ValueError):
    pass


class UnknownChannelError(RabiEmissionError, ValueError):
    pass


class NonUniqueSteadyStateError(RabiEmissionError):
    pass


class PositivityError(RabiEmissionError):
    """Steady state has eigenvalues below the positivity tolerance."""


class RatioUndefinedError(RabiEmissionError, ZeroDivisionError):
    pass


class NormalizationError(RabiEmissionError):
    """Reference rate is zero, so normalized rates are undefined."""


class SolverError(RabiEmissionError):
    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class ConvergenceError(RabiEmissionError):
    pass


class ConfigError(RabiEmissionError, ValueError):
    pass
