"""Exception types shared across the package."""


class AltEstError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(AltEstError, ValueError):
    """An argument violates a documented precondition."""


class InsufficientDataError(AltEstError, ValueError):
    """Not enough observations for the requested operation."""


class IllConditionedCovarianceError(AltEstError):
    """Covariance matrix is numerically singular and cannot be inverted."""


class InfeasibleRadiusError(AltEstError):
    """The solver certified that no point satisfies the residual constraint."""


class InvalidModeError(AltEstError, ValueError):
    """Requested mode is unavailable, e.g. the exact-noise gamma rule on data
    without stored noise."""


class BoundDivergenceError(AltEstError):
    """The error-floor formula diverges (nonpositive denominator)."""


class ConfigError(AltEstError, ValueError):
    """Experiment configuration is invalid; message names the field path."""
