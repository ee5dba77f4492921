"""Exception taxonomy shared across the simulator."""


class ParameterError(ValueError):
    """A value violates a documented constraint of a spec or operation."""


class RangeWindowError(RuntimeError):
    """The capture window does not land inside the chirp for this distance."""


class GeometryError(RuntimeError):
    """Beacon geometry is degenerate (collinear/coplanar, rank-deficient)."""


class ConvergenceError(RuntimeError):
    """Iterative solver ran out of iterations.

    Carries the last iterate so callers can inspect how close it got.
    """

    def __init__(self, message: str, last_iterate=None, iterations: int = 0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class ConfigError(ValueError):
    """A scenario configuration file or override is invalid."""
