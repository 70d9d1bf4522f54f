"""hyperalg: hyperdimensional computing model algebras, encoders, clean-up memory and capacity tools."""

from .errors import DensityUnderflowWarning, HyperalgError, MemoryLookupError, MetricError, ModelError, SpaceError
from .spaces import Hypervector, RngStream, SpaceSpec, random_hv, random_hvs, similarity

__version__ = "0.1.0"
