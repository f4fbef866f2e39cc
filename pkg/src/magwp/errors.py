"""Exception types shared across the package."""


class MagwpError(Exception):
    """Base class for all magwp errors."""


class DimensionMismatch(MagwpError):
    """Vector or matrix shapes are inconsistent with the declared dimension."""


class NotPositiveDefinite(MagwpError):
    """A covariance block was expected to be positive definite but is not."""


class NotSymplectic(MagwpError):
    """Wave packet width matrices violate the symplecticity condition."""


class StepTooLarge(MagwpError):
    """The step size violates the well-posedness bound of the magnetic substep."""


class TimeDependentUnsupported(MagwpError):
    """The requested scheme does not support explicitly time-dependent fields."""


class UnknownBuiltin(MagwpError):
    """Unknown builtin field identifier."""


class BadParams(MagwpError):
    """Invalid or incomplete parameters for a builtin field."""


class ZeroWeight(MagwpError):
    """A Runge-Kutta weight vanishes; the partner tableau is undefined."""


class NotSkew(MagwpError):
    """A matrix expected to be skew-symmetric is not."""


class ConfigError(MagwpError):
    """A run configuration file is invalid."""


class GridMismatch(MagwpError):
    """Two runs to be compared were not produced on the same time grid."""
