"""Exception hierarchy shared across the package.

CLI exit codes: usage errors map to 1, data errors to 2, numerical
failures to 3.
"""


class CovbreakError(Exception):
    """Base class for all package errors."""


class UsageError(CovbreakError):
    """Invalid or inconsistent configuration/flags."""


class DataError(CovbreakError):
    """Malformed or unusable input data (CSV, panels, prices)."""


class NotPositiveDefiniteError(CovbreakError):
    """A matrix required to be SPD failed its Cholesky factorization.

    ``minor`` is the order of the first non-positive leading minor
    (1-based), as reported by LAPACK.
    """

    def __init__(self, message: str, minor: int):
        super().__init__(message)
        self.minor = minor


class SingularCovarianceError(NotPositiveDefiniteError):
    """The long-run covariance estimate is singular (or indefinite)."""


class SpecValidationError(CovbreakError):
    """A model spec failed its stationarity/moment validator."""


class StudyError(CovbreakError):
    """A Monte Carlo study cell had too many failed replications."""


class SimulationOverflowError(CovbreakError):
    """A volatility recursion exceeded the overflow guard.

    ``index`` is the 0-based step at which the guard tripped.
    """

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index
