"""Exception and warning types shared across the package."""


class GaborError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(GaborError, ValueError):
    """A numeric argument violates an operation's precondition."""


class IncompatibleGridsError(GaborError, ValueError):
    pass


class SupportTruncationError(GaborError, ValueError):
    """The grid cannot hold the requested shifted Gaussian."""


class IterationLimitError(GaborError, RuntimeError):
    pass


class NotAFrameError(GaborError, ValueError):
    """The lattice density rules out a Gaussian Gabor frame."""


class ConditioningError(GaborError, RuntimeError):
    def __init__(self, message, a_est=None, b_est=None):
        super().__init__(message)
        self.a_est = a_est
        self.b_est = b_est


class NotRepresentableError(GaborError, ValueError):
    """The integral formula of the metaplectic operator does not apply."""


class PhaseUnavailableError(GaborError, ValueError):
    pass


class UnsupportedDimensionError(GaborError, ValueError):
    pass


class TruncationWarning(UserWarning):
    """Samples at the grid boundary are not negligible."""
