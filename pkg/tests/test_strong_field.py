"""Strong-field behaviour at eps_A E = pi/2: the growth-rate contrast
between rational and irrationally-detuned magnetic phases.

These are qualitative regime checks on shortened runs; the walker is
quasi-confined here, so the light-cone extent bound is bypassed and the
seam is verified explicitly instead.
"""

import math

import numpy as np
import pytest

from emwalk import _kernels
from emwalk.gauge import UniformEB
from emwalk.lattice import Grid
from emwalk.walk import SpinorField, WalkParams, evolve, seam_mass_fraction

E_STRONG = math.pi / 2


def q_spread_series(eps_a_b: float, steps: int, extent: int) -> np.ndarray:
    grid = Grid(extent, extent)
    offs2 = grid.offsets_q().astype(float) ** 2
    series = []

    def hook(j, psi, tilde):
        _, marg_q = _kernels.marginals(psi.minus, psi.plus)
        series.append(math.sqrt(float(np.dot(offs2, marg_q))))

    final = evolve(SpinorField.delta(grid), UniformEB(E=E_STRONG, B=eps_a_b),
                   steps, WalkParams(m=1.0), hooks=[hook], guard=False)
    assert seam_mass_fraction(final) <= 1e-10
    return np.asarray(series)


@pytest.mark.slow
def test_detuned_half_pi_spread_saturates_while_rational_grows():
    steps = 1200
    quarter_pi = q_spread_series(math.pi / 4, steps, 403)
    detuned = q_spread_series(math.pi / 2 + 0.04, steps, 403)
    late_growth_detuned = detuned[steps] - detuned[steps // 2]
    late_growth_rational = quarter_pi[steps] - quarter_pi[steps // 2]
    # the rational case keeps its linear growth; the detuned one flattens
    assert late_growth_rational > 5 * late_growth_detuned
    assert late_growth_detuned < 2.0


@pytest.mark.slow
def test_rational_half_pi_is_fast_ballistic():
    steps = 600
    series = q_spread_series(math.pi / 2, steps, 2 * steps + 3)
    early = (series[300] - series[100]) / 200
    late = (series[600] - series[400]) / 200
    assert late > 0.08
    assert abs(late - early) < 0.5 * early
