from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraclab.errors import DivergenceError, DomainError
from fraclab.identities import (
    BumpSpec,
    IdentityBudget,
    boundary_trace_integral,
    check_identity_ps,
    check_identity_qs,
    check_identity_rs,
    cs_ratio_numeric,
    frac_boundary_derivative,
    make_test_function,
    truncated_frac_lap,
    xs_surrogate,
)
from fraclab.special import FracOrder, constants_for

O1 = FracOrder(1, 0.4)


def test_bump_spec_values():
    b = BumpSpec((0.0,), 1.0)
    assert b.sup == pytest.approx(math.exp(-1))
    assert float(b(np.array([[0.0]]))[0]) == pytest.approx(math.exp(-1))
    assert float(b(np.array([[1.5]]))[0]) == 0.0
    p = BumpSpec((0.0, 0.0), 2.0, "polynomial", amplitude=3.0)
    assert p.sup == 3.0
    with pytest.raises(DomainError):
        BumpSpec((0.0,), -1.0)


def test_test_function_vanishes_left_and_scales():
    phi = make_test_function(BumpSpec((0.0,), 1.0), 0.4)
    x = np.array([[-0.5], [0.5]])
    v = phi(x)
    assert v[0] == 0.0
    assert v[1] == pytest.approx(0.5**0.4 * float(BumpSpec((0.0,), 1.0)(x[1:])[0]))
    assert phi.xs_check is not None and phi.xs_check.ok
    assert phi.touches_boundary
    assert phi.scaled(2.0)(x)[1] == pytest.approx(2 * v[1])


@given(st.floats(0.3, 3.0))
def test_dilation_covariance(lam):
    phi = make_test_function(BumpSpec((0.2,), 1.0), 0.4, check=False)
    d = phi.dilated(lam)
    x = np.array([[0.37]])
    # phi_lam(x) = phi(lam x)
    assert float(d(x)[0]) == pytest.approx(float(phi(lam * x)[0]), rel=1e-12, abs=1e-300)


def test_custom_leakage_is_rejected():
    with pytest.raises(DomainError):
        make_test_function(custom=lambda x: np.exp(-np.sum(x * x, axis=-1)), N=1, support_radius=3.0, s=0.4)


def test_frac_boundary_derivative_of_bump():
    phi = make_test_function(BumpSpec((0.0,), 1.0), 0.4, check=False)
    assert frac_boundary_derivative(phi) == pytest.approx(math.exp(-1))
    custom = make_test_function(
        custom=lambda x: np.clip(x[..., 0], 0, None) ** 0.4 * np.clip(1 - x[..., 0] ** 2, 0, None) ** 2,
        N=1, support_radius=1.0, s=0.4, check=False,
    )
    assert frac_boundary_derivative(custom) == pytest.approx(1.0, rel=1e-5)
    bad = make_test_function(custom=lambda x: np.clip(x[..., 0], 0, None) ** 0.2 * (np.abs(x[..., 0]) < 1),
                             N=1, support_radius=1.0, s=0.4, check=False)
    with pytest.raises(DivergenceError):
        frac_boundary_derivative(bad)


def test_truncated_operator_is_bounded():
    phi = make_test_function(BumpSpec((0.0,), 1.0), 0.4, check=False)
    a = truncated_frac_lap(O1, phi, [0.5], 1e-2)
    b = truncated_frac_lap(O1, phi, [0.5], 1e-3)
    assert abs(a - b) < 0.05 * max(abs(a), 1e-3)
    chk = xs_surrogate(O1, phi)
    assert chk.ok


def test_boundary_trace_integral_bump_1d():
    phi = make_test_function(BumpSpec((0.0,), 1.0), 0.4, check=False)
    assert boundary_trace_integral(phi) == pytest.approx(math.exp(-1))


@pytest.mark.slow
def test_weak_constants_close_identities_n1():
    phi = make_test_function(BumpSpec((0.0,), 1.0), 0.4)
    ps = check_identity_ps(O1, phi, constant_mode="weak")
    assert ps.rel_gap < 1e-4
    qs = check_identity_qs(O1, phi, "weak")
    assert qs.rel_gap < 1e-4
    rs = check_identity_rs(O1, phi)
    assert abs(rs.lhs) < 1e-4 * phi.psi_sup
    # the printed constants are reported next to the weak ones
    assert set(ps.alternatives) == {"lhs[paper]", "lhs[weak]"}
    assert "rhs[derived]" in qs.alternatives


def test_identity_budget_presets():
    b = IdentityBudget()
    assert b.refined().order >= b.order
    assert IdentityBudget.small().order < b.order


@pytest.mark.parametrize("N", [2, 3])
def test_cs_ratio_matches_derived(N):
    o = FracOrder(N, 0.3)
    assert cs_ratio_numeric(N, 0.3) == pytest.approx(constants_for(o).C_s_derived, rel=1e-10)
