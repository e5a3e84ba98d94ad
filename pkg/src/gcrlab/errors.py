"""Exception hierarchy shared by the compute modules and the CLI."""


class GCRError(Exception):
    """Base class for every error raised by gcrlab."""


class ConfigurationError(GCRError, ValueError):
    """Invalid grid, scene, or experiment parameters."""


class UnsupportedBoundaryError(GCRError):
    """An operation needs a periodic axis but got a non-periodic one."""


class MetricError(GCRError):
    """The metric is not positive-definite somewhere on the grid."""

    def __init__(self, message, node=None, coords=None, minor=None, value=None):
        super().__init__(message)
        self.node = node
        self.coords = coords
        self.minor = minor
        self.value = value


class ShapeMismatchError(GCRError, ValueError):
    """Index ranges or grids of two operands disagree."""


class DivergenceError(GCRError):
    """The minimizer increased its merit function over a whole inner loop."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class SchemaError(ConfigurationError):
    """A scene file failed schema or cross-field validation."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
