"""Exception types raised across the package."""


class HyperalgError(Exception):
    """Base class for library errors."""


class SpaceError(HyperalgError, ValueError):
    """Invalid space parameters, or operands living in different spaces."""


class MetricError(HyperalgError, ValueError):
    """A similarity metric was applied to a space it is not defined on."""


class ModelError(HyperalgError, ValueError):
    """An operation is not supported by (or not compatible with) a model."""


class MemoryLookupError(HyperalgError, KeyError):
    """Unknown or duplicate item-memory identifier."""


class DensityUnderflowWarning(UserWarning):
    """A sparse operation produced an all-zero hypervector."""
