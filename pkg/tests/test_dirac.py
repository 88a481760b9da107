import math

import numpy as np
import pytest

from emwalk.dirac import (DiracParams, convergence_study, delta_for_eigenstate,
                          eigenstates, hermiticity_defect, l2_norm, level_label,
                          reduced_hamiltonian, sample_to_walk_lattice)
from emwalk.errors import DomainTooSmall, IncommensurateStep


def landau_energy(m, b, n):
    """Closed-form relativistic Landau magnitude, the independent oracle."""
    return math.sqrt(m * m + 2.0 * n * b)


@pytest.fixture(scope="module")
def op_beta0():
    return reduced_hamiltonian(DiracParams(m=1.0, E=0.0, B=1.0), 7.5, 2.0 ** -9, order=4)


@pytest.fixture(scope="module")
def solutions_beta0(op_beta0):
    return eigenstates(op_beta0, [0, ("+", 1), ("+", 2), ("+", 3), ("-", 1)])


def test_params_validate_beta_range():
    with pytest.raises(ValueError):
        DiracParams(m=1.0, E=1.5, B=1.0)
    with pytest.raises(ValueError):
        DiracParams(m=1.0, E=0.0, B=-1.0)


def test_hermiticity(op_beta0):
    assert hermiticity_defect(op_beta0) <= 1e-12


def test_landau_spectrum_against_closed_form(solutions_beta0):
    """Diagonalisation cross-checked against sqrt(m^2 + 2 n B): the levels
    above the anchor mode must match n = 1, 2, 3 and the anchor itself has
    magnitude m (it sits on the negative branch with these conventions)."""
    by_level = {level_label(s.level): s.energy for s in solutions_beta0}
    assert abs(by_level["0"]) == pytest.approx(landau_energy(1, 1, 0), abs=1e-4)
    assert by_level["0"] < 0
    for n in (1, 2, 3):
        assert by_level[f"+{n}"] == pytest.approx(landau_energy(1, 1, n), abs=1e-4)
    assert by_level["-1"] == pytest.approx(-landau_energy(1, 1, 1), abs=1e-4)


def test_spectrum_symmetric_under_refinement():
    """Eigenvalue error shrinks by about 2^order when the step is halved."""
    dp = DiracParams(m=1.0, E=0.0, B=1.0)
    for order, lo, hi in ((2, 2.5, 6.5), (4, 9.0, 26.0)):
        drifts = []
        for h in (1 / 16, 1 / 32, 1 / 64):
            op = reduced_hamiltonian(dp, 7.5, h, order=order)
            drifts.append(eigenstates(op, [("+", 1)])[0].energy)
        d1 = abs(drifts[0] - drifts[1])
        d2 = abs(drifts[1] - drifts[2])
        assert lo <= d1 / d2 <= hi, (order, d1 / d2)


def test_boosted_energies_are_real_and_orthonormal():
    dp = DiracParams(m=1.0, E=0.5, B=1.0)
    op = reduced_hamiltonian(dp, 7.5, 2.0 ** -9, order=4)
    sols = eigenstates(op, [0, ("+", 1), ("+", 2), ("-", 1)])
    energies = [s.energy for s in sols]
    assert all(np.isreal(e) for e in energies)
    assert len(set(np.round(energies, 9))) == len(energies)
    gram = np.empty((len(sols), len(sols)), dtype=complex)
    for i, a in enumerate(sols):
        for j, b in enumerate(sols):
            gram[i, j] = np.vdot(a.profile, b.profile) * a.h
    assert np.abs(gram - np.eye(len(sols))).max() <= 1e-10


def test_boosted_zero_mode_scale():
    """The unpaired mode energy contracts by sqrt(1 - beta^2)."""
    beta = 0.5
    dp = DiracParams(m=1.0, E=beta, B=1.0)
    op = reduced_hamiltonian(dp, 7.5, 2.0 ** -9, order=4)
    sol = eigenstates(op, [0])[0]
    assert abs(sol.energy) == pytest.approx(math.sqrt(1 - beta ** 2), abs=1e-6)


def test_profiles_are_normalised_and_bulk_localised(solutions_beta0):
    for s in solutions_beta0:
        norm = (np.abs(s.profile) ** 2).sum() * s.h
        assert abs(norm - 1.0) <= 1e-12
        n = s.profile.shape[1]
        width = int(round(0.05 * n))
        edge = ((np.abs(s.profile[:, :width]) ** 2).sum()
                + (np.abs(s.profile[:, -width:]) ** 2).sum()) * s.h
        assert edge <= 1e-10


def test_level_outside_window_raises(op_beta0):
    with pytest.raises(DomainTooSmall):
        eigenstates(op_beta0, [("+", 40)])


# --- sampling and norms -------------------------------------------------------

def test_sampling_hits_fine_grid_nodes(solutions_beta0):
    sol = solutions_beta0[1]
    eps = 8 * sol.h
    prof = sample_to_walk_lattice(sol, eps, 4)
    center = sol.x.size // 2
    assert prof[0, 4] == sol.profile[0, center]
    assert prof[0, 0] == sol.profile[0, center - 32]


def test_sampling_incommensurate_step(solutions_beta0):
    sol = solutions_beta0[1]
    with pytest.raises(IncommensurateStep):
        sample_to_walk_lattice(sol, 2.5 * sol.h, 4)


def test_sampling_window_guard(solutions_beta0):
    sol = solutions_beta0[1]
    eps = 8 * sol.h
    with pytest.raises(DomainTooSmall):
        sample_to_walk_lattice(sol, eps, int(0.95 * 7.5 / eps))


def test_l2_norm_basics():
    prof = np.zeros((2, 5), dtype=complex)
    prof[0, 2] = 1.0
    eps = 0.25
    assert l2_norm(prof, eps) == pytest.approx(math.sqrt(eps), abs=1e-15)
    assert l2_norm(3.0 * prof, eps) == pytest.approx(3.0 * math.sqrt(eps), abs=1e-14)
    assert l2_norm(prof, 2 * eps) == pytest.approx(math.sqrt(2.0) * l2_norm(prof, eps), abs=1e-14)


def test_sampled_profile_norm_close_to_one(solutions_beta0):
    sol = solutions_beta0[1]
    for k in (4, 6):
        eps = 2.0 ** -k
        p_max = int(6.0 / eps)
        prof = sample_to_walk_lattice(sol, eps, p_max)
        assert abs(l2_norm(prof, eps) - 1.0) <= eps ** 2


# --- one-step distance ---------------------------------------------------------

def test_delta_is_nonnegative_and_scales_quadratically(solutions_beta0):
    sol = solutions_beta0[1]
    d4 = delta_for_eigenstate(sol, 2.0 ** -4)
    d5 = delta_for_eigenstate(sol, 2.0 ** -5)
    d6 = delta_for_eigenstate(sol, 2.0 ** -6)
    assert d4 > d5 > d6 > 0.0
    assert 3.3 <= d4 / d5 <= 4.8
    assert 3.3 <= d5 / d6 <= 4.8


def test_larger_boost_does_not_shrink_distance():
    h = 2.0 ** -9
    deltas = {}
    for beta in (0.2, 0.5):
        dp = DiracParams(m=1.0, E=beta, B=1.0)
        op = reduced_hamiltonian(dp, 7.5, h, order=4)
        sol = eigenstates(op, [("+", 1)])[0]
        deltas[beta] = delta_for_eigenstate(sol, 2.0 ** -5)
    assert deltas[0.5] >= 0.95 * deltas[0.2]


def test_mini_convergence_study_has_quadratic_slope():
    result = convergence_study([("+", 1)], [0.0], [2.0 ** -k for k in range(4, 8)],
                               refine_check=True)
    assert len(result.rows) == 4
    assert result.eigenvalue_drift <= 1e-5
    slope = result.slopes[0]["slope"]
    assert slope == pytest.approx(2.0, abs=0.15)
    deltas = [r["delta"] for r in sorted(result.rows, key=lambda r: -r["eps"])]
    assert all(a > b for a, b in zip(deltas, deltas[1:]))


def test_convergence_study_row_count():
    result = convergence_study([("+", 1), ("+", 2)], [0.0, 0.2],
                               [2.0 ** -k for k in range(4, 7)], refine_check=False)
    assert len(result.rows) == 2 * 2 * 3
    assert len(result.slopes) == 4
