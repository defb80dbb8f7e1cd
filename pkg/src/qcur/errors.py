"""Exception types shared across the package."""


class QcurError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(QcurError, ValueError):
    """Operands have incompatible or degenerate dimensions."""


class ParameterError(QcurError, ValueError):
    """A parameter is outside its documented domain."""


class FileFormatError(QcurError, ValueError):
    """A file does not conform to the expected on-disk layout."""


class DegenerateDistributionError(QcurError, ValueError):
    """A sampling distribution cannot be formed (e.g. all-zero weights)."""


class SamplingError(QcurError, RuntimeError):
    """An index draw cannot produce the requested number of indices."""


class DegenerateSamplingError(SamplingError):
    """A drawn index set lost rank needed by the surrounding computation."""
