"""Exception types shared by the library."""


class GeometryError(ValueError):
    """A region or radius escapes the sampled domain."""


class MarginError(ValueError):
    """An ambient-mode statistic was requested with insufficient margin."""


class SizingError(ValueError):
    """Internal discretisation too small/large for the requested window."""


class IntensityUnavailableError(ValueError):
    """Joint intensities are not analytically available for this model."""


class DegenerateGeometryError(ValueError):
    """Affinely dependent points where general position is required."""


class AcceptanceStarvationError(RuntimeError):
    """Rejection sampler accepted zero replicates."""

    def __init__(self, message, acceptance_rate=0.0):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate
