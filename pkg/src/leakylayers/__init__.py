"""Eigenvalues of Schrodinger operators with complex delta interactions on two
parallel hypersurfaces, and their first-order behaviour as the hypersurfaces
collide."""

from .coupling import Coupling
from .errors import (
    ConsistencyError,
    DomainError,
    GeometryError,
    LeakyLayersError,
    NoBoundStateError,
    NoConvergenceError,
    NormalizationError,
    RangeError,
)

__version__ = "0.1.0"

__all__ = [
    "Coupling",
    "ConsistencyError",
    "DomainError",
    "GeometryError",
    "LeakyLayersError",
    "NoBoundStateError",
    "NoConvergenceError",
    "NormalizationError",
    "RangeError",
]
