"""Periodic 2D lattice, time-sliced field histories and finite-difference operators.

Fields are plain numpy arrays whose last two axes are the spatial axes
(p, q); leading axes, when present, enumerate vector components.  All
spatial stencils wrap periodically, so they are total on finite input.

Five elementary operators act on a field Q_{j,p,q}:

    L Q       -> Q at time j+1 (time advance, needs the next slice)
    Sigma_1 Q -> (Q_{p+1,q} + Q_{p-1,q}) / 2
    Sigma_2 Q -> (Q_{p,q+1} + Q_{p,q-1}) / 2
    Delta_1 Q -> (Q_{p+1,q} - Q_{p-1,q}) / 2
    Delta_2 Q -> (Q_{p,q+1} - Q_{p,q-1}) / 2

They all commute with each other.  Two composite families divide by the
coupling step eps_A:

    d_0 = (L - Sigma_2 Sigma_1) / eps_A   d_1 = Delta_1 / eps_A   d_2 = Delta_2 Sigma_1 / eps_A
    D_0 = d_0                             D_1 = d_1 Sigma_2       D_2 = Delta_2 / eps_A
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, MissingSlice

__all__ = [
    "Grid",
    "FieldHistory",
    "sigma1",
    "sigma2",
    "delta1",
    "delta2",
    "apply_stencil",
    "apply_L",
    "d_mu",
    "D_mu",
    "d0_pair",
    "D1_of",
    "D2_of",
]

# axis numbering: p is the second-to-last array axis, q the last
_AXIS_P = -2
_AXIS_Q = -1


@dataclass(frozen=True)
class Grid:
    """Periodic rectangular lattice of extent_p x extent_q sites.

    Site (p, q) refers to array element [p, q]; signed offsets measured
    from the centre indices (extent // 2) are used wherever a potential
    or an observable needs a spatial coordinate.
    """

    extent_p: int
    extent_q: int

    def __post_init__(self) -> None:
        if self.extent_p < 3 or self.extent_q < 3:
            raise ValueError(
                f"grid extent must be >= 3 per axis, got {self.extent_p} x {self.extent_q}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.extent_p, self.extent_q)

    @property
    def center_p(self) -> int:
        return self.extent_p // 2

    @property
    def center_q(self) -> int:
        return self.extent_q // 2

    def offsets_p(self) -> np.ndarray:
        """Signed site offsets along p, zero at the grid centre."""
        return np.arange(self.extent_p) - self.center_p

    def offsets_q(self) -> np.ndarray:
        return np.arange(self.extent_q) - self.center_q

    def check_field(self, f: np.ndarray) -> None:
        if f.shape[-2:] != self.shape:
            raise GridMismatch(f"field shape {f.shape} does not end in {self.shape}")


class FieldHistory:
    """Ordered time slices of one lattice field, indexed by integer j >= 0.

    Every slice shares one grid; slices may carry leading component axes
    (e.g. a potential triple stored as shape (3, P, Q)).
    """

    def __init__(self, grid: Grid, slices=()):
        self.grid = grid
        self._slices: list[np.ndarray] = []
        for s in slices:
            self.append(s)

    def __len__(self) -> int:
        return len(self._slices)

    def append(self, f: np.ndarray) -> None:
        f = np.asarray(f)
        self.grid.check_field(f)
        self._slices.append(f)

    def slice(self, j: int) -> np.ndarray:
        if not 0 <= j < len(self._slices):
            raise MissingSlice(f"slice {j} absent (history holds 0..{len(self._slices) - 1})")
        return self._slices[j]


def sigma1(f: np.ndarray) -> np.ndarray:
    """Symmetric neighbour average along p (periodic)."""
    return 0.5 * (np.roll(f, -1, _AXIS_P) + np.roll(f, 1, _AXIS_P))


def sigma2(f: np.ndarray) -> np.ndarray:
    """Symmetric neighbour average along q (periodic)."""
    return 0.5 * (np.roll(f, -1, _AXIS_Q) + np.roll(f, 1, _AXIS_Q))


def delta1(f: np.ndarray) -> np.ndarray:
    """Central difference along p (periodic), no step division."""
    return 0.5 * (np.roll(f, -1, _AXIS_P) - np.roll(f, 1, _AXIS_P))


def delta2(f: np.ndarray) -> np.ndarray:
    """Central difference along q (periodic), no step division."""
    return 0.5 * (np.roll(f, -1, _AXIS_Q) - np.roll(f, 1, _AXIS_Q))


_STENCILS = {
    "sigma1": sigma1,
    "sigma2": sigma2,
    "delta1": delta1,
    "delta2": delta2,
}


def apply_stencil(kind: str, f: np.ndarray) -> np.ndarray:
    """Apply one of the four spatial stencils by name.

    kind is one of "sigma1", "sigma2", "delta1", "delta2" (case-insensitive).
    """
    try:
        op = _STENCILS[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown stencil kind {kind!r}") from None
    return op(np.asarray(f))


def apply_L(history: FieldHistory, j: int) -> np.ndarray:
    """Time advance: the field at slice j+1."""
    return history.slice(j + 1)


def d0_pair(f_j: np.ndarray, f_next: np.ndarray, eps_a: float) -> np.ndarray:
    """d_0 evaluated from two adjacent slices: (f_{j+1} - Sigma_2 Sigma_1 f_j) / eps_A."""
    return (f_next - sigma2(sigma1(f_j))) / eps_a


def d_mu(mu: int, history: FieldHistory, j: int, eps_a: float) -> np.ndarray:
    """Gauge-side finite difference d_mu at time slice j.

    mu = 0 consumes slices j and j+1; mu = 1, 2 consume slice j only.
    """
    if mu == 0:
        return d0_pair(history.slice(j), history.slice(j + 1), eps_a)
    if mu == 1:
        return delta1(history.slice(j)) / eps_a
    if mu == 2:
        return delta2(sigma1(history.slice(j))) / eps_a
    raise ValueError(f"mu must be 0, 1 or 2, got {mu}")


def D1_of(f: np.ndarray, eps_a: float) -> np.ndarray:
    """Conservation-side D_1 = Delta_1 Sigma_2 / eps_A applied to one slice."""
    return delta1(sigma2(f)) / eps_a


def D2_of(f: np.ndarray, eps_a: float) -> np.ndarray:
    """Conservation-side D_2 = Delta_2 / eps_A applied to one slice."""
    return delta2(f) / eps_a


def D_mu(mu: int, history: FieldHistory, j: int, eps_a: float) -> np.ndarray:
    """Conservation-side finite difference D_mu at time slice j.

    D_0 coincides with d_0; D_1 = d_1 Sigma_2; D_2 = Delta_2 / eps_A.
    """
    if mu == 0:
        return d0_pair(history.slice(j), history.slice(j + 1), eps_a)
    if mu == 1:
        return D1_of(history.slice(j), eps_a)
    if mu == 2:
        return D2_of(history.slice(j), eps_a)
    raise ValueError(f"mu must be 0, 1 or 2, got {mu}")
