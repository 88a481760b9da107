"""Exception types shared across the package."""


class EmWalkError(Exception):
    """Base class for all package-specific errors."""


class MissingSlice(EmWalkError):
    """A time slice required by a time-difference operator is absent."""


class GridMismatch(EmWalkError):
    """Fields that must share one lattice were built on different grids."""


class BoundaryGuard(EmWalkError):
    """Probability mass reached the periodic wrap seam of the grid."""


class PotentialNotQIndependent(EmWalkError):
    """A reduced 1D step was asked to use a potential that varies along q."""


class DomainTooSmall(EmWalkError):
    """The 1D continuum domain does not contain the requested state."""


class IncommensurateStep(EmWalkError):
    """Walk lattice step is not an integer multiple of the fine grid step."""


class NoOscillation(EmWalkError):
    """A period estimate was requested on a series with too few extrema."""


class NoFront(EmWalkError):
    """No qualifying local maximum found in a marginal density."""


class DegenerateFit(EmWalkError):
    """A least-squares fit has no spread in the abscissa."""
