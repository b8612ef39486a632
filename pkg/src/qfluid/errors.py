"""Exception hierarchy shared by all qfluid modules."""


class QFluidError(Exception):
    """Base class for every error raised by qfluid."""


class ParamError(QFluidError, ValueError):
    """Physical or numerical parameters outside their admissible range."""


class VacuumError(QFluidError):
    """A density fell below the configured floor."""


class NotGradientError(QFluidError):
    """A velocity field that must be curl-free is not."""


class WindingError(QFluidError):
    """A velocity field carries nonzero circulation around the torus."""


class MassMismatchError(QFluidError):
    """Two densities that must share their total mass do not."""


class DegenerateError(QFluidError):
    """A ratio was requested whose denominator vanishes."""


class BlowupError(QFluidError):
    """A field became non-finite or exceeded the blow-up threshold."""


class GridMismatchError(QFluidError):
    """Two trajectories or fields live on incompatible grids or time axes."""


class MissingDataError(QFluidError):
    """A run directory lacks the files needed for a report."""


class ConfigError(QFluidError, ValueError):
    """A run configuration failed validation."""
