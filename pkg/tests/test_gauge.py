import numpy as np
import pytest

from emwalk.errors import GridMismatch, MissingSlice
from emwalk.gauge import (FieldTensor, SampledPotential, UniformEB, field_tensor,
                          lower_to_upper, maxwell_identity_check, maxwell_residual,
                          potential_history, raise_tensor, sample_potential)
from emwalk.lattice import FieldHistory, Grid
from emwalk.walk import SpinorField, WalkParams, gauge_transform

from conftest import interior, linear_ramp


def test_uniform_eb_lower_samples():
    g = Grid(9, 9)
    spec = UniformEB(E=0.25, B=0.5, eps_l=2.0)
    a = sample_potential(spec, g, 3, "lower")
    p3 = g.center_p + 3
    assert a[0][p3, 0] == pytest.approx(-3 * 0.25 * 2.0, abs=0)
    assert np.abs(a[1]).max() == 0.0
    assert a[2][p3, 4] == pytest.approx(-3 * 0.5 * 2.0, abs=0)


def test_uniform_eb_upper_flips_spatial_sign():
    g = Grid(9, 9)
    spec = UniformEB(E=0.25, B=0.5, eps_l=1.0)
    a = sample_potential(spec, g, 0, "upper")
    p3 = g.center_p + 3
    assert a[2][p3, 0] == pytest.approx(3 * 0.5, abs=0)
    assert a[0][p3, 0] == pytest.approx(-3 * 0.25, abs=0)


def test_zero_fields_give_zero_potential():
    g = Grid(5, 5)
    a = sample_potential(UniformEB(E=0.0, B=0.0), g, 0, "lower")
    assert np.abs(a).max() == 0.0


def test_sampled_potential_index_conversion(rng):
    g = Grid(6, 6)
    triple = rng.standard_normal((3, 6, 6))
    hist = FieldHistory(g, [triple])
    spec = SampledPotential(hist, "lower")
    up = sample_potential(spec, g, 0, "upper")
    assert np.array_equal(up, lower_to_upper(triple))
    assert np.array_equal(sample_potential(spec, g, 0, "lower"), triple)
    with pytest.raises(MissingSlice):
        sample_potential(spec, g, 1, "lower")
    with pytest.raises(GridMismatch):
        sample_potential(spec, Grid(5, 5), 0, "lower")


def test_lower_to_upper_is_involution(rng):
    triple = rng.standard_normal((3, 4, 4))
    assert np.array_equal(lower_to_upper(lower_to_upper(triple)), triple)


# --- field tensor -----------------------------------------------------------

def test_field_tensor_uniform_electric():
    g = Grid(12, 12)
    hist = potential_history(UniformEB(E=0.3, B=0.0), g, 2)
    f = field_tensor(hist, 0, 1.0)
    assert np.allclose(interior(f.f01), 0.3, atol=1e-14)
    assert np.abs(interior(f.f02)).max() <= 1e-15
    assert np.abs(interior(f.f12)).max() <= 1e-15


def test_field_tensor_uniform_magnetic():
    g = Grid(12, 12)
    hist = potential_history(UniformEB(E=0.0, B=0.7), g, 2)
    f = field_tensor(hist, 0, 1.0)
    assert np.allclose(interior(f.f12), -0.7, atol=1e-14)


def test_field_tensor_spatially_constant_for_uniform_eb():
    g = Grid(16, 16)
    hist = potential_history(UniformEB(E=0.12, B=0.34), g, 2)
    f = field_tensor(hist, 0, 0.5)
    for comp in (f.f01, f.f02, f.f12):
        inner = interior(comp)
        assert np.abs(inner - inner[0, 0]).max() <= 1e-13


def test_field_tensor_gauge_invariance(rng):
    g = Grid(10, 10)
    params = WalkParams(m=1.0, eps_A=0.7)
    for _ in range(5):
        a = FieldHistory(g, [rng.standard_normal((3, 10, 10)) for _ in range(2)])
        phi = FieldHistory(g, [rng.standard_normal(g.shape) for _ in range(3)])
        _, a_prime = gauge_transform(SpinorField.zeros(g), a, phi, params)
        f = field_tensor(a, 0, params.eps_A)
        f_prime = field_tensor(a_prime, 0, params.eps_A)
        assert np.abs(f.f01 - f_prime.f01).max() <= 1e-12
        assert np.abs(f.f02 - f_prime.f02).max() <= 1e-12
        assert np.abs(f.f12 - f_prime.f12).max() <= 1e-12


def test_raise_tensor_signs(rng):
    g = Grid(5, 5)
    f = FieldTensor(np.full(g.shape, 0.3), np.full(g.shape, -0.1), np.full(g.shape, -0.7))
    up = raise_tensor(f)
    assert np.array_equal(up[0], -f.f01)
    assert np.array_equal(up[1], -f.f02)
    assert np.array_equal(up[2], f.f12)
    zero = raise_tensor(FieldTensor(*(np.zeros(g.shape),) * 3))
    assert all(np.abs(c).max() == 0.0 for c in zero)


# --- discrete Maxwell residual ----------------------------------------------

def test_residual_of_constant_tensor_is_minus_current(rng):
    g = Grid(9, 9)
    f = FieldTensor(np.full(g.shape, 1.1), np.full(g.shape, -0.4), np.full(g.shape, 0.9))
    current = tuple(rng.standard_normal(g.shape) for _ in range(3))
    r = maxwell_residual(f, f, current, 0.3)
    for r_nu, j_nu in zip(r, current):
        assert np.abs(r_nu + j_nu).max() <= 1e-14


def test_residual_zero_tensor_zero_current():
    g = Grid(7, 7)
    zero = FieldTensor(*(np.zeros(g.shape),) * 3)
    r = maxwell_residual(zero, zero, (np.zeros(g.shape),) * 3, 1.0)
    assert all(np.abs(c).max() == 0.0 for c in r)


def test_residual_matches_analytic_divergence_of_linear_tensor():
    """Components linear in (j, p, q) have constant divergence on interior
    sites, computable by hand from the stencil definitions."""
    g = Grid(13, 13)
    eps = 0.5
    a, b, c = 0.7, -0.3, 0.4    # f01 = a p + b q + c j
    d, e, f_ = 0.2, 0.9, -0.6   # f02 = d p + e q + f j
    gg, hh, kk = -0.8, 0.5, 0.3  # f12 = g p + h q + k j

    def tensor_at(j):
        return FieldTensor(
            linear_ramp(g, "p", a) + linear_ramp(g, "q", b) + c * j,
            linear_ramp(g, "p", d) + linear_ramp(g, "q", e) + f_ * j,
            linear_ramp(g, "p", gg) + linear_ramp(g, "q", hh) + kk * j,
        )

    current = (np.zeros(g.shape),) * 3
    r0, r1, r2 = maxwell_residual(tensor_at(0), tensor_at(1), current, eps)
    assert np.allclose(interior(r0), (a + e) / eps, atol=1e-13)
    assert np.allclose(interior(r1), (-c - hh) / eps, atol=1e-13)
    assert np.allclose(interior(r2), (-f_ + gg) / eps, atol=1e-13)


# --- double-divergence identity ---------------------------------------------

def test_identity_random_antisymmetric_tensors(rng):
    g = Grid(16, 16)
    for _ in range(20):
        f_j = FieldTensor(*(rng.standard_normal(g.shape) for _ in range(3)))
        f_next = FieldTensor(*(rng.standard_normal(g.shape) for _ in range(3)))
        assert maxwell_identity_check(f_j, f_next, 1.0) <= 1e-13


def test_identity_constant_tensor_is_exactly_zero():
    g = Grid(8, 8)
    f = FieldTensor(np.full(g.shape, 2.0), np.full(g.shape, -1.0), np.full(g.shape, 0.5))
    assert maxwell_identity_check(f, f, 0.7) == 0.0


def test_identity_uniform_eb_tensor():
    g = Grid(16, 16)
    hist = potential_history(UniformEB(E=0.04, B=0.16), g, 3)
    f0 = field_tensor(hist, 0, 1.0)
    f1 = field_tensor(hist, 1, 1.0)
    assert maxwell_identity_check(f0, f1, 1.0) <= 1e-13
