"""Exception and warning types.

Each exception carries the process exit code used by the command line.
"""


class CBPError(Exception):
    exit_code = 1


class ConfigError(CBPError, ValueError):
    """Bad user configuration or out-of-domain parameter."""

    exit_code = 2


class DomainError(ConfigError):
    """Parameter outside its admissible space."""


class DataError(CBPError, ValueError):
    """Input data violates a structural invariant."""

    exit_code = 3


class EstimationError(DataError):
    """Data carry no information for the requested estimator."""


class DegeneracyError(CBPError, ArithmeticError):
    """Numerical degeneracy: flat objective, undefined posterior, bad curvature."""

    exit_code = 4


class DegenerateObjectiveError(DegeneracyError):
    pass


class DegenerateCurvatureError(DegeneracyError):
    pass


class PosteriorUndefinedError(DegeneracyError):
    pass


class PopulationOverflowError(DataError, OverflowError):
    pass


class DegradedAccuracyWarning(UserWarning):
    pass


class ConvergenceWarning(UserWarning):
    pass


class SubcriticalWarning(UserWarning):
    pass
