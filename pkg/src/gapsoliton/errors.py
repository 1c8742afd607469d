"""Exception types raised across the package."""


class GapSolitonError(Exception):
    """Base class for all package errors."""


class UnsupportedDimension(GapSolitonError, ValueError):
    pass


class GridMismatch(GapSolitonError, ValueError):
    """Raised when arrays or fields do not live on the expected grid."""


class IncommensurateShift(GapSolitonError, ValueError):
    pass


class GapViolation(GapSolitonError):
    """An eigenvalue of some -Laplacian + V_i lies within gap_tol of zero."""

    def __init__(self, message, component=None, eigenvalue=None):
        super().__init__(message)
        self.component = component
        self.eigenvalue = eigenvalue


class CapExceeded(GapSolitonError):
    pass


class InadmissibleModel(GapSolitonError, ValueError):
    """Nonlinearity parameters violate the structural constraints of the family."""


class InnerDiverged(GapSolitonError):
    pass


class NonConcave(GapSolitonError):
    pass


class MaxIterations(GapSolitonError):
    """Outer loop hit its iteration cap; ``best`` holds the best result seen."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class TailTooShort(GapSolitonError):
    pass


class NoDecay(GapSolitonError):
    def __init__(self, message, r2=None):
        super().__init__(message)
        self.r2 = r2


class FieldFormatError(GapSolitonError, ValueError):
    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ConfigError(GapSolitonError, ValueError):
    pass
