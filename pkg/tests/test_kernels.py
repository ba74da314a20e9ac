from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraclab.errors import DomainError, SingularValue
from fraclab.kernels import (
    BoundaryLayerMeasure,
    NormMode,
    ball_solution,
    boundary_profile,
    fundamental_ps,
    green_ball,
    green_halfspace,
    halfspace_poisson_integral,
    poisson_ball,
    poisson_halfspace,
    poisson_mass,
    poisson_superposition,
    source_density,
)
from fraclab.special import FracOrder, constants_for

O2 = FracOrder(2, 0.5)
LOG = FracOrder(1, 0.5, allow_log=True)


def test_green_symmetric_and_zero_outside():
    o = FracOrder(2, 0.3)
    x, y = np.array([0.2, 0.1]), np.array([-0.3, 0.4])
    assert green_ball(o, x, y) == pytest.approx(green_ball(o, y, x), rel=1e-13)
    assert green_ball(o, x, [1.5, 0.0]) == 0.0
    assert green_halfspace(o, [1.0, 0.2], [0.5, -0.1]) == pytest.approx(green_halfspace(o, [0.5, -0.1], [1.0, 0.2]))
    assert green_halfspace(o, [-1.0, 0.0], [0.5, 0.0]) == 0.0


def test_green_diagonal_is_tagged_singular():
    v = green_ball(O2, [0.1, 0.1], [0.1, 0.1])
    assert isinstance(v, SingularValue) and math.isinf(v)
    assert isinstance(green_halfspace(O2, [1, 0], [1, 0]), SingularValue)


def test_green_ball_log_case_value():
    # interval (-1, 1): G(0, 1/2) = ln(2 + sqrt 3) / pi
    assert green_ball(LOG, [0.0], [0.5]) == pytest.approx(math.log(2 + math.sqrt(3)) / math.pi, rel=1e-13)


def test_green_halfspace_log_case_is_large_ball_limit():
    r = 1e6
    g = green_halfspace(LOG, [0.7], [1.3])
    assert g == pytest.approx(green_ball(LOG, [0.7 - r], [1.3 - r], r), rel=1e-6)


def test_green_halfspace_rejects_recurrent():
    with pytest.raises(DomainError):
        green_halfspace(FracOrder(1, 0.75, allow_recurrent=True), [1.0], [2.0])


@given(st.sampled_from([1, 2]), st.sampled_from([0.25, 0.5, 0.75]))
def test_poisson_masses(N, s):
    o = FracOrder(N, s, allow_log=True, allow_recurrent=True)
    x = [0.4] + [0.3] * (N - 1)
    assert poisson_mass(o, x) == pytest.approx(1.0, abs=1e-6)
    assert poisson_mass(o, x, norm_mode=NormMode.PAPER_K) == pytest.approx(2 ** (2 * s - 1) / s, abs=1e-6)
    assert poisson_mass(o, [0.9] + [0.0] * (N - 1), "halfspace") == pytest.approx(1.0, abs=1e-6)


def test_poisson_kernels_zero_or_singular():
    assert poisson_ball(O2, [0.1, 0], [0.5, 0.5]) == 0.0
    assert isinstance(poisson_ball(O2, [0.1, 0], [1.0, 0.0]), SingularValue)
    with pytest.raises(DomainError):
        poisson_halfspace(O2, [1, 0], [0.5, 0])


def test_norm_mode_aliases():
    assert NormMode.coerce("paper_K") is NormMode.PAPER_K
    assert NormMode.coerce("probabilistic_kappa") is NormMode.PROBABILISTIC
    with pytest.raises(ValueError):
        NormMode.coerce("other")


def test_fundamental_is_poisson_limit():
    o = FracOrder(2, 0.4)
    x = np.array([0.8, 0.3])
    eps = 1e-7
    lim = eps**o.s * poisson_halfspace(o, x, [-eps, 0.0], NormMode.PAPER_K)
    assert lim == pytest.approx(fundamental_ps(o, x), rel=1e-5)


def test_boundary_profiles():
    o = FracOrder(2, 0.3)
    assert boundary_profile(o, [4.0, 1.0], "R_s") == pytest.approx(4.0**0.3)
    assert boundary_profile(o, [-4.0, 1.0], "R_s") == 0.0
    assert boundary_profile(o, [4.0, 1.0], "Q_s") == pytest.approx(4.0**-0.7)
    assert isinstance(boundary_profile(o, [0.0, 1.0], "Q_s"), SingularValue)


@pytest.mark.parametrize("N", [2, 3])
def test_layer_closed_forms_match_quadrature(N):
    o = FracOrder(N, 0.4)
    x = [0.7] + [0.2] * (N - 1)
    for mu in (BoundaryLayerMeasure.layer_mu(0.3), BoundaryLayerMeasure.layer_nu(0.3)):
        a = poisson_superposition(o, x, mu, NormMode.PAPER_K)
        b = poisson_superposition(o, x, mu, NormMode.PAPER_K, method="quadrature")
        assert a == pytest.approx(b, rel=1e-6)


def test_source_density_closed_vs_quadrature():
    o = FracOrder(2, 0.4)
    mu = BoundaryLayerMeasure.layer_mu(0.5)
    x = np.array([0.6, 0.1])
    assert source_density(o, mu)(x) == pytest.approx(source_density(o, mu, "quadrature")(x), rel=1e-6)


def test_dirac_measures():
    o = FracOrder(2, 0.4)
    x = [0.6, 0.1]
    v = poisson_superposition(o, x, BoundaryLayerMeasure.dirac_shifted(0.2))
    assert v == pytest.approx(poisson_halfspace(o, x, [-0.2, 0.0]))
    with pytest.raises(DomainError):
        BoundaryLayerMeasure.dirac_at([0.5, 0.0])


def test_halfspace_integral_of_one_is_one():
    o = FracOrder(1, 0.3)
    assert halfspace_poisson_integral(o, [0.5], lambda y: 1.0) == pytest.approx(1.0, rel=1e-7)


def test_ball_solution_tends_to_poisson_kernel():
    o = FracOrder(2, 0.5)
    x = np.array([0.5, 0.2])
    far = ball_solution(o, x, 0.3, 1e7)
    assert far == pytest.approx(poisson_halfspace(o, x, [-0.3, 0.0], NormMode.PAPER_K), rel=1e-5)
    assert constants_for(o).K_s_paper > 0
