"""Continuum Dirac reference for convergence studies.

For crossed uniform fields described by A_0 = -E X^1, A_1 = 0,
A_2 = -B X^1 and the separable ansatz Psi = Phi(X^1) exp(i K X^2), the
first-order wave equation reduces to a 1D eigenproblem

    H Phi = energy * Phi,
    H = E X^1 + i s3 d/dX^1 + (K + B X^1) s2 + m s1,

with s1, s2, s3 the Pauli matrices.  H is discretised on a fine uniform
grid with hard-wall boundaries and central differences (order 2 or 4),
then diagonalised with a sparse shift-invert eigensolver.  The low part
of the spectrum consists of mirror pairs +/-|energy| plus one unpaired
mode, which identifies the level labelled 0; level (+, n) is the n-th
eigenvalue above it and (-, n) the n-th below.

At E = 0 the energies must match sqrt(m^2 + 2 n B) (checked externally);
for 0 < E/B < 1 the same construction yields the boosted states without
any closed-form input.

One walk step of duration eps applied to a sampled eigenstate should
reproduce the phase rotation exp(-i energy * eps) up to O(eps^2); the
relative distance between the two is ``delta_for_eigenstate`` and its
scaling with eps is measured by ``convergence_study``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import DomainTooSmall, IncommensurateStep
from .observables import loglog_slope
from .walk import WalkParams, step_k_reduced

__all__ = [
    "DiracParams",
    "ReducedOperator",
    "EigenSolution",
    "reduced_hamiltonian",
    "hermiticity_defect",
    "eigenstates",
    "sample_to_walk_lattice",
    "l2_norm",
    "delta_for_eigenstate",
    "convergence_study",
    "default_support_constant",
    "level_label",
]

_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)

EDGE_FRACTION = 0.05
EDGE_MASS_LIMIT = 1e-10
_EIGSH_SEED = 101


@dataclass(frozen=True)
class DiracParams:
    """Mass, crossed-field strengths and transverse momentum of the reduced problem."""

    m: float
    E: float
    B: float
    K: float = 0.0

    def __post_init__(self) -> None:
        if self.B <= 0:
            raise ValueError("B must be positive")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"require 0 <= E/B < 1, got beta = {self.beta}")

    @property
    def beta(self) -> float:
        return self.E / self.B


@dataclass
class ReducedOperator:
    """Discretised reduced Hamiltonian plus the grid it lives on."""

    params: DiracParams
    matrix: sp.csr_matrix
    x: np.ndarray
    h: float
    order: int

    @property
    def half_width(self) -> float:
        return float(self.x[-1])


@dataclass
class EigenSolution:
    """One eigenpair of the reduced problem, L2-normalised on the fine grid."""

    level: tuple
    energy: float
    params: DiracParams
    x: np.ndarray
    profile: np.ndarray  # shape (2, N)
    h: float


def level_label(level) -> str:
    """Compact string form of a level: '0', '+1', '-2', ..."""
    if level == 0 or level == (0,):
        return "0"
    sign, n = level
    return f"{sign}{n}"


def _difference_matrix(n: int, h: float, order: int) -> sp.dia_matrix:
    """Antisymmetric central-difference matrix for d/dx with zero boundary values."""
    if order == 2:
        coeffs = {1: 1.0 / (2.0 * h)}
    elif order == 4:
        coeffs = {1: 8.0 / (12.0 * h), 2: -1.0 / (12.0 * h)}
    else:
        raise ValueError(f"order must be 2 or 4, got {order}")
    diags, offsets = [], []
    for k, c in coeffs.items():
        diags += [np.full(n - k, c), np.full(n - k, -c)]
        offsets += [k, -k]
    return sp.diags(diags, offsets)


def reduced_hamiltonian(dp: DiracParams, half_width: float, h: float,
                        order: int = 4) -> ReducedOperator:
    """Build the Hermitian reduced operator on x in [-half_width, half_width].

    The number of grid intervals per half width is rounded to an integer,
    so the realised half width is M*h with M = round(half_width / h); the
    walker sample points p*eps then coincide with fine-grid nodes whenever
    eps is an integer multiple of h.
    """
    m_half = int(round(half_width / h))
    if m_half < 8:
        raise DomainTooSmall(f"half width {half_width} spans only {m_half} fine steps")
    x = (np.arange(-m_half, m_half + 1)) * h
    n = x.size
    deriv = _difference_matrix(n, h, order)
    ham = (
        sp.kron(deriv, 1j * _SIGMA3)
        + sp.kron(sp.diags(dp.E * x), sp.identity(2))
        + sp.kron(sp.diags(dp.K + dp.B * x), _SIGMA2)
        + sp.kron(sp.identity(n), dp.m * _SIGMA1)
    )
    return ReducedOperator(dp, ham.tocsr(), x, h, order)


def hermiticity_defect(op: ReducedOperator) -> float:
    """Max abs entry of H - H^dagger (construction self-check)."""
    diff = op.matrix - op.matrix.conjugate().transpose()
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def _edge_mass(profile: np.ndarray, h: float, edge_fraction: float) -> float:
    n = profile.shape[1]
    width = max(int(round(edge_fraction * n)), 1)
    dens = (np.abs(profile[0]) ** 2 + np.abs(profile[1]) ** 2) * h
    return float(dens[:width].sum() + dens[-width:].sum())


def _roughness(profile: np.ndarray) -> float:
    """Relative grid-scale oscillation content of a normalised profile.

    Central differences of a first-order operator admit spurious
    branches whose eigenvectors alternate sign between neighbouring
    nodes; for those this measure is O(1), while for resolved smooth
    states it is O((h k)^2).  A fixed threshold separates the two by
    many orders of magnitude.
    """
    num = float((np.abs(np.diff(profile, axis=1)) ** 2).sum())
    den = float((np.abs(profile) ** 2).sum())
    return num / den


_ROUGHNESS_LIMIT = 0.5


def _rayleigh(matrix: sp.csr_matrix, profile: np.ndarray) -> float:
    vec = profile.T.ravel()
    return float((np.vdot(vec, matrix @ vec) / np.vdot(vec, vec)).real)


def _smooth_members(vecs: np.ndarray, group: list[int], h: float,
                    matrix: sp.csr_matrix, group_vals: np.ndarray):
    """Resolved (non-alternating) eigenpairs spanned by one near-degenerate group.

    With second-order differences the alternating branch is exactly
    degenerate with the resolved one, and accidental crossings between
    the two branches occur at any order, so the eigensolver can return
    mixtures; diagonalising the first-difference quadratic form inside
    the group separates them again.  Energies of re-mixed profiles are
    Rayleigh quotients, which restores the +/- mirror symmetry that the
    raw near-degenerate eigenvalues break.  Singleton groups reduce to a
    plain roughness test.
    """
    profiles = []
    for i in group:
        prof = vecs[:, i].reshape(-1, 2).T.copy()
        prof /= math.sqrt(float((np.abs(prof) ** 2).sum()) * h)
        profiles.append(prof)
    remixed = len(group) > 1
    if remixed:
        diffs = [np.diff(p, axis=1) for p in profiles]
        m = np.array([[np.vdot(da.ravel(), db.ravel()) for db in diffs] for da in diffs])
        g = np.array([[np.vdot(a.ravel(), b.ravel()) for b in profiles] for a in profiles])
        _, w = sla.eigh(m, g)
        profiles = [sum(w[a, i] * profiles[a] for a in range(len(group)))
                    for i in range(len(group))]
        for i, p in enumerate(profiles):
            profiles[i] = p / math.sqrt(float((np.abs(p) ** 2).sum()) * h)
    out = []
    for k, prof in enumerate(profiles):
        if _roughness(prof) > _ROUGHNESS_LIMIT:
            continue
        peak = np.argmax(np.abs(prof))
        prof *= np.exp(-1j * np.angle(prof.flat[peak]))
        energy = _rayleigh(matrix, prof) if remixed else float(group_vals[k])
        out.append((energy, prof))
    return out


def eigenstates(op: ReducedOperator, which, n_pairs: int | None = None) -> list[EigenSolution]:
    """Eigenpairs for the requested levels of one reduced operator.

    ``which`` lists levels as 0 or ('+', n) / ('-', n).  Internally the
    eigenvalues nearest zero are computed by shift-invert Lanczos with a
    fixed start vector (deterministic output), profiles are normalised
    and phase-fixed, wall-localised artefacts are rejected through the
    edge-mass criterion, and the unpaired eigenvalue anchors the level
    labelling.
    """
    which = list(which)
    max_n = max([lv[1] for lv in which if lv != 0] or [0])
    if n_pairs is None:
        n_pairs = max_n + 4
    # roughly half the window is taken up by grid-scale spurious branches
    k = 4 * n_pairs + 2
    dim = op.matrix.shape[0]
    rng = np.random.default_rng(_EIGSH_SEED)
    v0 = rng.standard_normal(dim)
    vals, vecs = eigsh(op.matrix.tocsc(), k=k, sigma=0.0, which="LM", v0=v0)
    order_idx = np.argsort(vals)
    vals = vals[order_idx]
    vecs = vecs[:, order_idx]

    kept_vals, kept_profiles = [], []
    # group near-degenerate eigenvalues: resolved and grid-scale branches can
    # cross accidentally, and close pairs come back from the solver mixed
    scale0 = max(float(np.abs(vals).max()), 1.0)
    groups: list[list[int]] = [[0]]
    for i in range(1, vals.size):
        if vals[i] - vals[groups[-1][-1]] <= 1e-5 * scale0:
            groups[-1].append(i)
        else:
            groups.append([i])
    for group in groups:
        for energy, prof in _smooth_members(vecs, group, op.h, op.matrix,
                                            vals[group]):
            if _edge_mass(prof, op.h, EDGE_FRACTION) > EDGE_MASS_LIMIT:
                continue
            kept_vals.append(energy)
            kept_profiles.append(prof)
    if not kept_vals:
        raise DomainTooSmall("all computed eigenstates touch the domain edge")
    resort = np.argsort(kept_vals)
    kept = np.array(kept_vals)[resort]
    kept_profiles = [kept_profiles[i] for i in resort]

    # mirror pairing: the spectrum is symmetric except for one mode
    scale = max(np.abs(kept).max(), 1.0)
    atol = 1e-6 * scale
    border = np.abs(kept).max() - atol  # pairs cut by the window are ignored
    unpaired = [
        i for i, e in enumerate(kept)
        if np.abs(kept + e).min() > atol and abs(e) < border
    ]
    if len(unpaired) != 1:
        raise RuntimeError(
            f"expected one unpaired mode, found {len(unpaired)} among {kept}"
        )
    zero_idx = unpaired[0]
    zero_energy = kept[zero_idx]

    above = [i for i, e in enumerate(kept) if e > zero_energy + atol]
    below = [i for i, e in enumerate(kept) if e < zero_energy - atol][::-1]
    out = []
    for lv in which:
        if lv == 0:
            idx = zero_idx
        else:
            sign, n = lv
            pool = above if sign == "+" else below
            if n < 1 or n > len(pool):
                raise DomainTooSmall(
                    f"level {lv} outside the computed window (have {len(pool)})"
                )
            idx = pool[n - 1]
        out.append(EigenSolution(lv, kept[idx], op.params, op.x, kept_profiles[idx], op.h))
    return out


def sample_to_walk_lattice(sol: EigenSolution, eps: float, p_max: int) -> np.ndarray:
    """Eigenprofile values at walk sites X = p*eps for |p| <= p_max.

    eps must be an integer multiple of the fine step, and the sampled
    window must stay well inside the fine domain.
    """
    ratio = eps / sol.h
    if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
        raise IncommensurateStep(f"eps = {eps} is not an integer multiple of h = {sol.h}")
    ratio = int(round(ratio))
    half_width = float(sol.x[-1])
    if p_max * eps >= 0.9 * half_width:
        raise DomainTooSmall(
            f"sampled window {p_max * eps:.3f} reaches 90% of the domain half width {half_width:.3f}"
        )
    center = sol.x.size // 2
    idx = center + ratio * np.arange(-p_max, p_max + 1)
    return sol.profile[:, idx].copy()


def l2_norm(profile: np.ndarray, eps: float) -> float:
    """Lattice L2 norm: sqrt(sum over sites of |components|^2 * eps)."""
    return math.sqrt(float((np.abs(profile) ** 2).sum()) * eps)


def default_support_constant(b_field: float) -> float:
    """Half-width (in physical units) of the walker sampling window."""
    return 6.0 / math.sqrt(b_field)


def delta_for_eigenstate(sol: EigenSolution, eps: float,
                         support_constant: float | None = None) -> float:
    """Relative distance between one walk step and the exact phase rotation.

    The eigenprofile is sampled on walk sites with p_max = floor(C/eps),
    advanced once by the reduced walk step (with all walk steps set to
    eps), and compared against exp(-i energy * eps) times itself.  Both
    norms use the same sampling window.  One padding site on either end
    feeds the shift stencil, so no boundary artefact enters the window.
    """
    dp = sol.params
    if support_constant is None:
        support_constant = default_support_constant(dp.B)
    p_max = int(math.floor(support_constant / eps))
    padded = sample_to_walk_lattice(sol, eps, p_max + 1)
    x = eps * np.arange(-(p_max + 1), p_max + 2)
    a_upper = (-dp.E * x, np.zeros_like(x), dp.B * x)
    params = WalkParams(m=dp.m, eps_m=eps, eps_A=eps, eps_l=eps)
    stepped = step_k_reduced(padded, dp.K, a_upper, params)[:, 1:-1]
    rotated = np.exp(-1j * sol.energy * eps) * padded[:, 1:-1]
    return l2_norm(stepped - rotated, eps) / l2_norm(rotated, eps)


@dataclass
class ConvergenceResult:
    """Distance table and fitted log-log slopes of a convergence study."""

    rows: list  # dicts: level, beta, eps, delta
    slopes: list  # dicts: level, beta, slope
    eigenvalue_drift: float  # worst relative drift under h -> h/2


def convergence_study(levels, betas, eps_grid, m: float = 1.0, b_field: float = 1.0,
                      k_momentum: float = 0.0, order: int = 4, fit_skip: int = 2,
                      refine_check: bool = True) -> ConvergenceResult:
    """Scan delta(eps) over levels x betas and fit one slope per curve.

    eps values must all be integer multiples of the smallest one; the
    fine step is fixed to min(eps)/8 so that every walk lattice embeds in
    the fine grid.  The two largest eps of each curve are excluded from
    the slope fit (pre-asymptotic).  When ``refine_check`` is set, each
    reduced operator is rebuilt at half the fine step and the relative
    eigenvalue drift is required to stay below 1e-5.
    """
    eps_grid = sorted(eps_grid, reverse=True)
    eps_min = eps_grid[-1]
    for eps in eps_grid:
        if abs(eps / eps_min - round(eps / eps_min)) > 1e-9:
            raise IncommensurateStep(f"eps = {eps} is not a multiple of {eps_min}")
    fit_skip = min(fit_skip, max(len(eps_grid) - 3, 0))
    h = eps_min / 8.0
    support = default_support_constant(b_field)

    rows, slopes = [], []
    worst_drift = 0.0
    for beta in betas:
        dp = DiracParams(m=m, E=beta * b_field, B=b_field, K=k_momentum)
        # boosted states displace and widen along the confined axis
        half_width = support * (1.25 + 2.0 * beta)
        op = reduced_hamiltonian(dp, half_width, h, order)
        defect = hermiticity_defect(op)
        if defect > 1e-12:
            raise RuntimeError(f"reduced operator not Hermitian: defect {defect:.3e}")
        sols = eigenstates(op, levels)
        if refine_check:
            op_fine = reduced_hamiltonian(dp, half_width, h / 2.0, order)
            sols_fine = eigenstates(op_fine, levels)
            for s, sf in zip(sols, sols_fine):
                drift = abs(s.energy - sf.energy) / max(abs(sf.energy), 1e-300)
                worst_drift = max(worst_drift, drift)
            if worst_drift > 1e-5:
                raise RuntimeError(
                    f"oracle eigenvalues drift {worst_drift:.3e} under h -> h/2"
                )
        for sol in sols:
            deltas = []
            for eps in eps_grid:
                d = delta_for_eigenstate(sol, eps, support)
                rows.append({
                    "level": level_label(sol.level),
                    "beta": beta,
                    "eps": eps,
                    "delta": d,
                })
                deltas.append((eps, d))
            fit_pts = deltas[fit_skip:]
            slopes.append({
                "level": level_label(sol.level),
                "beta": beta,
                "slope": loglog_slope(fit_pts),
            })
    return ConvergenceResult(rows, slopes, worst_drift)
