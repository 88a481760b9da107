"""Potential specifications, metric index handling and discrete field tensor.

Lower-index potentials (A_0, A_1, A_2) are canonical; upper components
follow from the metric diag(1, -1, -1), i.e. A^0 = A_0, A^i = -A_i.
The antisymmetric field tensor

    F_mu_nu = d_mu A_nu - d_nu A_mu

is gauge invariant site-wise, and the divergence-style residual

    R^nu = D_mu F^{mu nu} - J^nu

is provided together with the exact identity D_nu D_mu F^{mu nu} = 0
(the operators commute and F is antisymmetric), which this module
evaluates numerically as a self-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch
from .lattice import D1_of, D2_of, FieldHistory, Grid, d0_pair, delta1, delta2, sigma1

__all__ = [
    "UniformEB",
    "SampledPotential",
    "sample_potential",
    "lower_to_upper",
    "FieldTensor",
    "field_tensor",
    "raise_tensor",
    "maxwell_residual",
    "maxwell_identity_check",
]


def lower_to_upper(triple: np.ndarray) -> np.ndarray:
    """Flip the sign of the two spatial components (metric diag(1,-1,-1)).

    The map is an involution, so it also converts upper to lower.
    """
    a0, a1, a2 = triple
    return np.stack([np.asarray(a0), -np.asarray(a1), -np.asarray(a2)])


@dataclass(frozen=True)
class UniformEB:
    """Linear potential generating constant crossed electric/magnetic fields.

    Lower components: A_0 = -E p eps_l, A_1 = 0, A_2 = -B p eps_l, with p
    the signed site offset from the grid centre (the initial walker site
    sits at zero potential).  Time independent.
    """

    E: float
    B: float
    eps_l: float = 1.0

    def lower_columns(self, grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = (grid.offsets_p() * self.eps_l)[:, None]
        zero = np.zeros((grid.extent_p, 1))
        return (-self.E * x, zero, -self.B * x)

    def upper_at(self, grid: Grid, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Upper-index triple as (P, 1) columns, broadcastable over q."""
        a0, a1, a2 = self.lower_columns(grid)
        return (a0, -a1, -a2)

    def static_upper_profiles(self, grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Time-independent per-row upper samples; enables the buffered fast path."""
        a0, a1, a2 = self.upper_at(grid, 0)
        return (a0[:, 0], a1[:, 0], a2[:, 0])


@dataclass
class SampledPotential:
    """Potential given explicitly per (j, p, q), as a history of (3, P, Q) slices."""

    history: FieldHistory
    index_position: str = "lower"

    def __post_init__(self) -> None:
        if self.index_position not in ("lower", "upper"):
            raise ValueError(f"index_position must be 'lower' or 'upper', got {self.index_position!r}")

    def upper_at(self, grid: Grid, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if grid.shape != self.history.grid.shape:
            raise GridMismatch(f"{grid.shape} vs sampled potential grid {self.history.grid.shape}")
        triple = self.history.slice(j)
        if self.index_position == "lower":
            triple = lower_to_upper(triple)
        return (triple[0], triple[1], triple[2])


def sample_potential(spec, grid: Grid, j: int, index_position: str = "lower") -> np.ndarray:
    """Dense (3, P, Q) potential samples at time j in the requested index position."""
    if index_position not in ("lower", "upper"):
        raise ValueError(f"index_position must be 'lower' or 'upper', got {index_position!r}")
    if isinstance(spec, UniformEB):
        triple = np.stack(
            [np.broadcast_to(a, grid.shape).copy() for a in spec.lower_columns(grid)]
        )
        stored = "lower"
    elif isinstance(spec, SampledPotential):
        if grid.shape != spec.history.grid.shape:
            raise GridMismatch(f"{grid.shape} vs sampled potential grid {spec.history.grid.shape}")
        triple = np.array(spec.history.slice(j), dtype=float)
        stored = spec.index_position
    else:
        raise TypeError(f"unknown potential spec {type(spec).__name__}")
    if stored != index_position:
        triple = lower_to_upper(triple)
    return triple


def potential_history(spec, grid: Grid, n_slices: int) -> FieldHistory:
    """Materialise lower-index samples of ``spec`` for time slices 0..n_slices-1."""
    hist = FieldHistory(grid)
    for j in range(n_slices):
        hist.append(sample_potential(spec, grid, j, "lower"))
    return hist


@dataclass
class FieldTensor:
    """Independent lower-index components of the antisymmetric field tensor.

    f01 and f02 play the role of the two electric components, f12 of the
    magnetic one.
    """

    f01: np.ndarray
    f02: np.ndarray
    f12: np.ndarray


def field_tensor(a_lower: FieldHistory, j: int, eps_a: float) -> FieldTensor:
    """Discrete field tensor at time j; consumes potential slices j and j+1."""
    cur = a_lower.slice(j)
    nxt = a_lower.slice(j + 1)
    inv = 1.0 / eps_a
    f01 = d0_pair(cur[1], nxt[1], eps_a) - delta1(cur[0]) * inv
    f02 = d0_pair(cur[2], nxt[2], eps_a) - delta2(sigma1(cur[0])) * inv
    f12 = delta1(cur[2]) * inv - delta2(sigma1(cur[1])) * inv
    return FieldTensor(f01, f02, f12)


def raise_tensor(f: FieldTensor) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Upper-index components (F^01, F^02, F^12) = (-F_01, -F_02, F_12)."""
    return (-f.f01, -f.f02, f.f12)


def _divergence_upper(f_j: FieldTensor, f_next: FieldTensor, eps_a: float):
    """D_mu F^{mu nu} for nu = 0, 1, 2 (time difference taken at slice j)."""
    r0 = D1_of(f_j.f01, eps_a) + D2_of(f_j.f02, eps_a)
    r1 = -d0_pair(f_j.f01, f_next.f01, eps_a) - D2_of(f_j.f12, eps_a)
    r2 = -d0_pair(f_j.f02, f_next.f02, eps_a) + D1_of(f_j.f12, eps_a)
    return r0, r1, r2


def maxwell_residual(f_j: FieldTensor, f_next: FieldTensor, current, eps_a: float):
    """Site-wise R^nu = D_mu F^{mu nu} - J^nu from two adjacent tensor slices.

    ``current`` is the (J^0, J^1, J^2) triple at time j.  A residual of
    zero means the tensor history sources exactly this current.
    """
    j0, j1, j2 = current
    r0, r1, r2 = _divergence_upper(f_j, f_next, eps_a)
    return (r0 - j0, r1 - j1, r2 - j2)


def maxwell_identity_check(f_j: FieldTensor, f_next: FieldTensor, eps_a: float) -> float:
    """Max abs of D_nu D_mu F^{mu nu} over all sites; zero up to rounding.

    Two adjacent tensor slices suffice: every term of the double
    divergence contains at most one time difference, because the
    diagonal tensor components vanish.
    """
    r_j = _divergence_upper(f_j, f_next, eps_a)
    # nu = 0 needs the purely spatial divergence again at slice j+1
    r0_next = D1_of(f_next.f01, eps_a) + D2_of(f_next.f02, eps_a)
    total = (
        d0_pair(r_j[0], r0_next, eps_a)
        + D1_of(r_j[1], eps_a)
        + D2_of(r_j[2], eps_a)
    )
    return float(np.abs(total).max())
