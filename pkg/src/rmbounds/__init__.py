"""Free-space radio map model, interpolators and reconstruction error bounds."""
from rmbounds.kernels import BACKEND
from rmbounds.mapmodel import (
    FreeSpaceMap,
    MappedRegion,
    SourceParams,
    alpha_from_power,
    proximity_coefficient,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FreeSpaceMap",
    "MappedRegion",
    "SourceParams",
    "alpha_from_power",
    "proximity_coefficient",
]
