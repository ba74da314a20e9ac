from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraclab.errors import DomainError
from fraclab.harmonics import (
    Polynomial,
    RadialKernel,
    annulus_frac_lap_poly,
    fischer_pairing,
    harmonic_basis,
    harmonic_dim,
    kappa_ratio,
    monomials,
    sigma,
    sigma_frac,
    spherical_average_deficit,
    sphere_mean_exact,
    sphere_moment,
    zj_coefficients,
)
from fraclab.special import FracOrder, sphere_measure


def random_homogeneous(N: int, m: int, rng: random.Random) -> Polynomial:
    return Polynomial(N, {e: rng.randint(-5, 5) for e in monomials(N, m)})


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("m", range(7))
def test_basis_dimension_and_harmonicity(N, m):
    basis = harmonic_basis(N, m)
    expected = math.comb(m + N - 1, m) - (math.comb(m + N - 3, m - 2) if m >= 2 else 0)
    assert len(basis) == harmonic_dim(N, m) == expected
    for p in basis:
        assert p.laplacian().is_zero
        assert p.homogeneous_degree == m


def test_basis_orthogonal_to_norm_multiples():
    N, m = 3, 4
    r2 = Polynomial.norm_squared(N)
    for p in harmonic_basis(N, m):
        for q in harmonic_basis(N, m - 2) + [Polynomial.monomial(e) for e in monomials(N, m - 2)]:
            assert fischer_pairing(p, r2 * q) == 0


def test_polynomial_algebra():
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    p = x**2 - y**2
    assert p.laplacian().is_zero
    assert (x * y).evaluate_exact([Fraction(1, 2), 3]) == Fraction(3, 2)
    assert np.allclose(p.evaluate(np.array([[1.0, 2.0], [3.0, 1.0]])), [-3.0, 8.0])
    assert repr(p) != ""
    with pytest.raises(DomainError):
        Polynomial(2, {(1, 0, 0): 1})


@given(st.lists(st.integers(0, 4), min_size=1, max_size=4))
def test_sphere_means_consistent(alpha):
    alpha = tuple(alpha)
    assert float(sphere_mean_exact(alpha)) * sphere_measure(len(alpha)) == pytest.approx(sphere_moment(alpha), rel=1e-12)


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("m", range(7))
def test_annulus_value_exactly_zero_on_harmonics(N, m):
    rng = random.Random(100 * N + m)
    o = FracOrder(N, 0.37)
    for p in harmonic_basis(N, m):
        for _ in range(2):
            x = [Fraction(rng.randint(-9, 9), 7) for _ in range(N)]
            for eps in (0.5, 0.1, 1e-3):
                assert annulus_frac_lap_poly(o, p, x, eps) == 0.0


def test_non_harmonic_polynomials_have_nonzero_zj():
    rng = random.Random(7)
    count = 0
    while count < 20:
        N, m = rng.choice([2, 3, 4]), rng.randint(2, 6)
        p = random_homogeneous(N, m, rng)
        if p.laplacian().is_zero:
            continue
        x = [Fraction(rng.randint(-9, 9), 5) for _ in range(N)]
        z = zj_coefficients(p, x, exact=True)
        assert any(v != 0 for v in z.values())
        count += 1


def test_annulus_value_matches_deficit_integral():
    # c * int (p(x) - p(x+z)) |z|^{-N-2s} over the annulus, radial quadrature of the exact spherical deficit
    from scipy.integrate import quad

    N, s, eps = 2, 0.3, 0.25
    o = FracOrder(N, s)
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    p = x**4 + x * y**2
    pt = [Fraction(1, 3), Fraction(-1, 2)]
    from fraclab.special import c_ns

    f = lambda r: -float(spherical_average_deficit(p, pt, r)) * sphere_measure(N) * r ** (N - 1 - N - 2 * s)
    ref = c_ns(N, s) * quad(f, eps, 1 / eps, limit=200, epsrel=1e-12)[0]
    assert annulus_frac_lap_poly(o, p, pt, eps) == pytest.approx(ref, rel=1e-9)


def test_sigma_frac_closed_form():
    assert sigma_frac(0.5, 1, 0.1) == pytest.approx(-2 * math.log(0.1))
    K = RadialKernel.frac(2, 0.3)
    assert sigma(K, 2, 0.1) == pytest.approx(sigma_frac(0.3, 2, 0.1))


def test_kappa_ratio_rejects_low_index():
    with pytest.raises(DomainError):
        kappa_ratio(RadialKernel.frac(2, 0.3), 2, 1, 2, 0.1)
