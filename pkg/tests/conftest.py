import numpy as np
import pytest

from emwalk.lattice import Grid
from emwalk.walk import SpinorField


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_field(rng, grid, complex_valued=False):
    if complex_valued:
        return rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return rng.standard_normal(grid.shape)


def random_state(rng, grid):
    psi = SpinorField(
        grid,
        rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape),
        rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape),
    )
    scale = 1.0 / np.sqrt(psi.norm_sq())
    psi.minus *= scale
    psi.plus *= scale
    return psi


def linear_ramp(grid, axis, slope):
    """slope * signed_offset along one axis, constant along the other."""
    if axis == "p":
        return np.repeat((slope * grid.offsets_p())[:, None], grid.extent_q, axis=1)
    return np.repeat((slope * grid.offsets_q())[None, :], grid.extent_p, axis=0)


def interior(field, margin=2):
    return field[margin:-margin, margin:-margin]
