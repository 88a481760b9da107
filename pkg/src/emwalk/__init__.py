"""2D electromagnetic discrete-time quantum walk simulation engine."""

__version__ = "0.1.0"

from .errors import (
    BoundaryGuard,
    DegenerateFit,
    DomainTooSmall,
    EmWalkError,
    GridMismatch,
    IncommensurateStep,
    MissingSlice,
    NoFront,
    NoOscillation,
    PotentialNotQIndependent,
)
from .lattice import FieldHistory, Grid
from .walk import CoinParams, SpinorField, WalkParams

__all__ = [
    "__version__",
    "BoundaryGuard",
    "CoinParams",
    "DegenerateFit",
    "DomainTooSmall",
    "EmWalkError",
    "FieldHistory",
    "Grid",
    "GridMismatch",
    "IncommensurateStep",
    "MissingSlice",
    "NoFront",
    "NoOscillation",
    "PotentialNotQIndependent",
    "SpinorField",
    "WalkParams",
]
