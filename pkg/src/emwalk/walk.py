"""Two-component walker state, coin and shift operators, one-step evolution.

One time step applies, in order:

    shift along p  ->  coin U(theta_plus,  eps_A * A^1, 0)
    shift along q  ->  coin U(theta_minus, eps_A * A^2, eps_A * A^0)

with U(theta, xi, alpha) = e^{i alpha} C(theta) S(xi), where S multiplies
the minus component by e^{i xi} and the plus component by e^{-i xi}, and
C mixes the components through cos(theta) / i sin(theta).  Every coin is
evaluated at the site where it is applied, i.e. after the preceding
shift.  Potentials enter with upper indices (A^0, A^1, A^2).

The same update restricted to the separable ansatz
Psi(p, q) = Phi(p) e^{i K q eps_l} is available as a 1D reduced step, and
the local phase-rotation symmetry of the update is exposed through
``gauge_transform``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BoundaryGuard, GridMismatch, MissingSlice, PotentialNotQIndependent
from .lattice import FieldHistory, Grid, d0_pair, delta1, delta2, sigma1

__all__ = [
    "CoinParams",
    "WalkParams",
    "SpinorField",
    "coin_matrix",
    "mass_angles",
    "shift",
    "half_step_p",
    "step",
    "step_k_reduced",
    "gauge_transform",
    "evolve",
    "seam_mass_fraction",
]

SEAM_GUARD_WIDTH = 2
SEAM_GUARD_THRESHOLD = 1e-10


@dataclass(frozen=True)
class CoinParams:
    """Angles of one coin operator U(theta, xi, alpha), in radians."""

    theta: float
    xi: float = 0.0
    alpha: float = 0.0


@dataclass(frozen=True)
class WalkParams:
    """Mass / step / coupling parameters of a walk.

    The two mass angles are always derived from (eps_m, m) via
    ``mass_angles`` and never stored.  ``charge_scale`` multiplies every
    potential sample consumed by ``evolve`` (a charge g corresponds to
    the scale -g); the default 1 leaves potentials untouched.
    """

    m: float
    eps_m: float = 1.0
    eps_A: float = 1.0
    eps_l: float = 1.0
    charge_scale: float = 1.0

    def __post_init__(self) -> None:
        for name in ("eps_m", "eps_A", "eps_l"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def mass_angles(params: WalkParams) -> tuple[float, float]:
    """Return (theta_plus, theta_minus) = (+pi/4 - eps_m m / 2, -pi/4 - eps_m m / 2)."""
    half = 0.5 * params.eps_m * params.m
    return (0.25 * math.pi - half, -0.25 * math.pi - half)


def coin_matrix(c: CoinParams) -> np.ndarray:
    """Dense 2x2 coin operator e^{i alpha} C(theta) S(xi).

    Used by tests and by the reduced-Hamiltonian tooling; the stepping
    kernels below apply the same algebra without materialising matrices.
    """
    ct, st = math.cos(c.theta), math.sin(c.theta)
    ep, em = np.exp(1j * c.xi), np.exp(-1j * c.xi)
    return np.exp(1j * c.alpha) * np.array(
        [[ct * ep, 1j * st * em], [1j * st * ep, ct * em]], dtype=np.complex128
    )


@dataclass
class SpinorField:
    """Walker state: complex minus/plus amplitudes on one periodic grid."""

    grid: Grid
    minus: np.ndarray
    plus: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid) -> "SpinorField":
        return cls(
            grid,
            np.zeros(grid.shape, dtype=np.complex128),
            np.zeros(grid.shape, dtype=np.complex128),
        )

    @classmethod
    def delta(cls, grid: Grid, offset_p: int = 0, offset_q: int = 0,
              component: str = "minus", amplitude: complex = 1.0) -> "SpinorField":
        """State with a single nonzero amplitude at the given signed offsets."""
        psi = cls.zeros(grid)
        target = psi.minus if component == "minus" else psi.plus
        target[grid.center_p + offset_p, grid.center_q + offset_q] = amplitude
        return psi

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.minus.copy(), self.plus.copy())

    def norm_sq(self) -> float:
        """Total probability, accumulated in fixed array order."""
        return float(
            np.sum(np.abs(self.minus) ** 2) + np.sum(np.abs(self.plus) ** 2)
        )

    def check_same_grid(self, other: "SpinorField") -> None:
        if self.grid.shape != other.grid.shape:
            raise GridMismatch(f"{self.grid.shape} vs {other.grid.shape}")


def shift(axis: int, psi: SpinorField) -> SpinorField:
    """Component-dependent one-site translation T_1 (axis=1) or T_2 (axis=2).

    The minus component is pulled from the +1 neighbour and the plus
    component from the -1 neighbour along the chosen axis.
    """
    ax = {1: 0, 2: 1}[axis]
    return SpinorField(
        psi.grid,
        np.roll(psi.minus, -1, axis=ax),
        np.roll(psi.plus, 1, axis=ax),
    )


def seam_mass_fraction(psi: SpinorField, width: int = SEAM_GUARD_WIDTH) -> float:
    """Fraction of total probability within `width` sites of the wrap seam."""
    dens_rows = (
        np.abs(psi.minus[:width]) ** 2 + np.abs(psi.minus[-width:]) ** 2
        + np.abs(psi.plus[:width]) ** 2 + np.abs(psi.plus[-width:]) ** 2
    )
    dens_cols = (
        np.abs(psi.minus[:, :width]) ** 2 + np.abs(psi.minus[:, -width:]) ** 2
        + np.abs(psi.plus[:, :width]) ** 2 + np.abs(psi.plus[:, -width:]) ** 2
    )
    total = psi.norm_sq()
    if total == 0.0:
        return 0.0
    return float(dens_rows.sum() + dens_cols.sum()) / total


def _as_upper_triple(a_upper) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a0, a1, a2 = a_upper
    return np.asarray(a0), np.asarray(a1), np.asarray(a2)


def half_step_p(psi: SpinorField, a1_upper: np.ndarray, params: WalkParams) -> SpinorField:
    """Shift along p followed by the first coin U(theta_plus, eps_A A^1, 0).

    This is the intermediate state of ``step``; its component densities
    feed the second current component.
    """
    theta_plus, _ = mass_angles(params)
    cp = math.cos(theta_plus)
    isp = 1j * math.sin(theta_plus)
    phase = np.exp(1j * params.eps_A * np.asarray(a1_upper))
    x = phase * np.roll(psi.minus, -1, axis=0)
    y = np.conj(phase) * np.roll(psi.plus, 1, axis=0)
    return SpinorField(psi.grid, cp * x + isp * y, isp * x + cp * y)


def _second_half_step(psi_tilde: SpinorField, a0_upper, a2_upper,
                      params: WalkParams, k_phase: complex | None = None) -> SpinorField:
    _, theta_minus = mass_angles(params)
    cm = math.cos(theta_minus)
    ism = 1j * math.sin(theta_minus)
    a0 = params.eps_A * np.asarray(a0_upper)
    a2 = params.eps_A * np.asarray(a2_upper)
    up = np.exp(1j * (a0 + a2))
    um = np.exp(1j * (a0 - a2))
    if k_phase is None:
        x = up * np.roll(psi_tilde.minus, -1, axis=1)
        y = um * np.roll(psi_tilde.plus, 1, axis=1)
    else:
        # reduced 1D step: the q shift acts on the plane-wave factor only
        x = (k_phase * up) * psi_tilde.minus
        y = (np.conj(k_phase) * um) * psi_tilde.plus
    return SpinorField(psi_tilde.grid, cm * x + ism * y, ism * x + cm * y)


def step(psi: SpinorField, a_upper, params: WalkParams,
         want_intermediate: bool = False, guard: bool = True):
    """Advance the walker by one time step.

    Parameters
    ----------
    psi:
        State at time j.
    a_upper:
        Triple (A^0, A^1, A^2) of per-site potential samples at time j,
        each broadcastable against the grid shape.
    want_intermediate:
        Also return the state after the first shift-and-coin.
    guard:
        Raise BoundaryGuard when more than 1e-10 of the probability sits
        within two sites of the wrap seam (the periodic update remains
        exact, but continuum-facing observables are void once the light
        cone wraps).  Disable for deliberately delocalised states.

    Returns the new state, or ``(new_state, intermediate)``.
    """
    a0, a1, a2 = _as_upper_triple(a_upper)
    for a in (a0, a1, a2):
        if a.ndim == 2 and a.shape not in ((psi.grid.extent_p, 1), psi.grid.shape):
            raise GridMismatch(f"potential shape {a.shape} not broadcastable to {psi.grid.shape}")
    if guard:
        frac = seam_mass_fraction(psi)
        if frac > SEAM_GUARD_THRESHOLD:
            raise BoundaryGuard(
                f"probability {frac:.3e} within {SEAM_GUARD_WIDTH} sites of the wrap seam"
            )
    psi_tilde = half_step_p(psi, a1, params)
    out = _second_half_step(psi_tilde, a0, a2, params)
    if want_intermediate:
        return out, psi_tilde
    return out


def _reduce_potential_profile(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim <= 1:
        return a
    if a.ndim == 2:
        if a.shape[1] == 1:
            return a[:, 0]
        if np.ptp(a, axis=1).max() == 0.0:
            return a[:, 0]
        raise PotentialNotQIndependent("potential varies along q")
    raise PotentialNotQIndependent(f"cannot reduce potential of shape {a.shape}")


def step_k_reduced(profile: np.ndarray, k: float, a_upper, params: WalkParams) -> np.ndarray:
    """One step of the walk restricted to Psi(p, q) = Phi(p) e^{i K q eps_l}.

    ``profile`` has shape (2, P) with rows (minus, plus); the periodic
    q shift becomes multiplication of the minus row by e^{+i K eps_l}
    and the plus row by its conjugate.  Potentials must not depend on q.
    """
    profile = np.asarray(profile, dtype=np.complex128)
    a0, a1, a2 = (_reduce_potential_profile(a) for a in a_upper)
    theta_plus, theta_minus = mass_angles(params)
    cp, isp = math.cos(theta_plus), 1j * math.sin(theta_plus)
    cm, ism = math.cos(theta_minus), 1j * math.sin(theta_minus)

    phase1 = np.exp(1j * params.eps_A * a1)
    x = phase1 * np.roll(profile[0], -1)
    y = np.conj(phase1) * np.roll(profile[1], 1)
    tm = cp * x + isp * y
    tp = isp * x + cp * y

    k_phase = np.exp(1j * k * params.eps_l)
    alpha = params.eps_A * np.asarray(a0)
    xi2 = params.eps_A * np.asarray(a2)
    x2 = (k_phase * np.exp(1j * (alpha + xi2))) * tm
    y2 = (np.conj(k_phase) * np.exp(1j * (alpha - xi2))) * tp
    return np.stack([cm * x2 + ism * y2, ism * x2 + cm * y2])


def gauge_transform(psi0: SpinorField, a_lower: FieldHistory, phi: FieldHistory,
                    params: WalkParams) -> tuple[SpinorField, FieldHistory]:
    """Local phase rotation of the walker and matching shift of the potential.

    Returns (psi0', A') with psi0' = e^{-i phi_0} psi0 and
    A'_mu = A_mu - d_mu phi, slice by slice.  ``a_lower`` holds
    lower-index triples of shape (3, P, Q); ``phi`` must extend one
    slice further than ``a_lower`` because d_0 consumes slice j+1.
    """
    n = len(a_lower)
    if len(phi) < n + 1:
        raise MissingSlice(
            f"phase history holds {len(phi)} slices, need {n + 1} for {n} potential slices"
        )
    out = FieldHistory(a_lower.grid)
    inv_eps = 1.0 / params.eps_A
    for j in range(n):
        f_j = phi.slice(j)
        d0 = d0_pair(f_j, phi.slice(j + 1), params.eps_A)
        d1 = delta1(f_j) * inv_eps
        d2 = delta2(sigma1(f_j)) * inv_eps
        out.append(a_lower.slice(j) - np.stack([d0, d1, d2]))
    phase = np.exp(-1j * phi.slice(0))
    psi0_prime = SpinorField(psi0.grid, phase * psi0.minus, phase * psi0.plus)
    return psi0_prime, out


def _as_row_profile(a, extent_p: int) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0:
        return np.full(extent_p, float(arr))
    if arr.shape == (extent_p,):
        return arr
    if arr.shape == (extent_p, 1):
        return arr[:, 0]
    raise GridMismatch(f"potential profile shape {arr.shape} not usable on {extent_p} rows")


def _evolve_rowphase(psi0: SpinorField, profiles, steps: int, params: WalkParams,
                     hooks, guard: bool) -> SpinorField:
    """Buffered trajectory loop for time-independent, q-independent potentials.

    Coin phases collapse to one complex number per row, so each step is
    two fused sweeps over preallocated buffers; arithmetic matches
    ``step`` operation for operation.
    """
    grid = psi0.grid
    scale = params.charge_scale * params.eps_A
    a0, a1, a2 = (scale * _as_row_profile(a, grid.extent_p) for a in profiles)
    p1 = np.exp(1j * a1)
    u = np.exp(1j * (a0 + a2))
    v = np.exp(1j * (a0 - a2))
    theta_plus, theta_minus = mass_angles(params)
    cp, isp = math.cos(theta_plus), 1j * math.sin(theta_plus)
    cm, ism = math.cos(theta_minus), 1j * math.sin(theta_minus)

    cur = SpinorField(grid, np.ascontiguousarray(psi0.minus, dtype=np.complex128),
                      np.ascontiguousarray(psi0.plus, dtype=np.complex128))
    tilde = SpinorField.zeros(grid)
    out = SpinorField.zeros(grid)
    for j in range(steps):
        if guard:
            frac = seam_mass_fraction(cur)
            if frac > SEAM_GUARD_THRESHOLD:
                raise BoundaryGuard(
                    f"step {j}: probability {frac:.3e} within "
                    f"{SEAM_GUARD_WIDTH} sites of the wrap seam"
                )
        _kernels.pass1(cur.minus, cur.plus, p1, cp, isp, tilde.minus, tilde.plus)
        _kernels.pass2(tilde.minus, tilde.plus, u, v, cm, ism, out.minus, out.plus)
        for hook in hooks:
            hook(j, cur, tilde)
        cur, out = out, cur
    for hook in hooks:
        hook(steps, cur, None)
    return cur


def evolve(psi0: SpinorField, potential, steps: int, params: WalkParams,
           hooks=(), guard: bool = True) -> SpinorField:
    """Apply ``step`` repeatedly, feeding observers along the way.

    ``potential`` is any object with an ``upper_at(grid, j)`` method
    returning the (A^0, A^1, A^2) triple at time j (see gauge module),
    or a callable ``j -> triple``.  Each hook is called as
    ``hook(j, psi_j, psi_tilde_j)`` for j = 0..steps-1 and finally as
    ``hook(steps, psi_final, None)``.  States handed to hooks may be
    reused buffers: copy what must outlive the call.

    With ``guard`` enabled the grid must satisfy extent >= 2*steps + 3
    per axis so the light cone of a centred initial condition cannot
    reach the wrap seam.

    Potentials exposing ``static_upper_profiles(grid)`` (time
    independent, constant along q) take a buffered fast path that
    produces the same trajectory as the generic loop.
    """
    if guard:
        need = 2 * steps + 3
        if psi0.grid.extent_p < need or psi0.grid.extent_q < need:
            raise BoundaryGuard(
                f"grid {psi0.grid.shape} too small for {steps} guarded steps (need >= {need})"
            )
    static_profiles = getattr(potential, "static_upper_profiles", None)
    if static_profiles is not None:
        return _evolve_rowphase(psi0, static_profiles(psi0.grid), steps, params, hooks, guard)

    sample = potential.upper_at if hasattr(potential, "upper_at") else potential
    scale = params.charge_scale
    psi = psi0
    for j in range(steps):
        a0, a1, a2 = sample(psi0.grid, j) if hasattr(potential, "upper_at") else sample(j)
        if scale != 1.0:
            a0, a1, a2 = scale * np.asarray(a0), scale * np.asarray(a1), scale * np.asarray(a2)
        psi_next, psi_tilde = step(psi, (a0, a1, a2), params,
                                   want_intermediate=True, guard=guard)
        for hook in hooks:
            hook(j, psi, psi_tilde)
        psi = psi_next
    for hook in hooks:
        hook(steps, psi, None)
    return psi
