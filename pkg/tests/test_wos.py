from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from fraclab.errors import DomainError
from fraclab.special import FracOrder
from fraclab.wos import (
    ExteriorData,
    WalkConfig,
    _rng,
    jump_tail_probability,
    reference_value,
    sample_ball_jump,
    wos_estimate,
)

O2 = FracOrder(2, 0.5)


def test_jump_law_matches_tail_probability():
    o = FracOrder(2, 0.3)
    y = sample_ball_jump(o, 2.0, _rng(5, 0), size=40000)
    rad = np.linalg.norm(y, axis=1)
    assert np.all(rad > 2.0)
    for k in (1.5, 3.0, 10.0):
        p = jump_tail_probability(o, k)
        est = np.mean(rad > 2.0 * k)
        assert abs(est - p) < 4 * math.sqrt(p * (1 - p) / rad.size)


def test_jump_radius_is_beta():
    o = FracOrder(1, 0.4)
    y = sample_ball_jump(o, 1.0, _rng(1, 0), size=20000)
    w = 1.0 / y[:, 0] ** 2
    assert stats.kstest(w, stats.beta(0.4, 0.6).cdf).pvalue > 1e-3


@given(st.floats(1.0, 50.0))
def test_tail_probability_monotone(k):
    o = FracOrder(2, 0.5)
    assert 0.0 <= jump_tail_probability(o, k * 1.1) <= jump_tail_probability(o, k) <= 1.0


def test_constant_data_gives_exact_one():
    st_ = wos_estimate(O2, [1.0, 0.0], ExteriorData.const(1.0), WalkConfig(n_walks=2000, seed=1))
    assert st_.estimate == 1.0 and st_.capped_fraction == 0.0


def test_reproducible_and_worker_independent():
    g = ExteriorData.box_indicator((-2.0, -1.0), (-1.0, 1.0))
    a = wos_estimate(O2, [1.0, 0.0], g, WalkConfig(n_walks=9000, seed=11, norm_check=False))
    b = wos_estimate(O2, [1.0, 0.0], g, WalkConfig(n_walks=9000, seed=11, norm_check=False, workers=3))
    c = wos_estimate(O2, [1.0, 0.0], g, WalkConfig(n_walks=9000, seed=12, norm_check=False))
    assert a.estimate == b.estimate and a.std_error == b.std_error
    assert a.estimate != c.estimate


def test_box_estimate_agrees_with_quadrature():
    g = ExteriorData.box_indicator((-2.0, -1.0), (-1.0, 1.0))
    st_ = wos_estimate(O2, [1.0, 0.0], g, WalkConfig(n_walks=20000, seed=3))
    assert abs(st_.z_score) <= 4.0
    assert st_.reference == pytest.approx(reference_value(O2, [1.0, 0.0], g))


def test_scaling_covariance_of_reference():
    g = ExteriorData.box_indicator((-2.0, -1.0), (-1.0, 1.0))
    a = reference_value(O2, [1.0, 0.0], g)
    b = reference_value(O2, [2.0, 0.0], g.dilated(2.0))
    assert a == pytest.approx(b, rel=1e-6)


def test_capped_walks_warn():
    g = ExteriorData.const(1.0)
    with pytest.warns(RuntimeWarning):
        st_ = wos_estimate(O2, [1.0, 0.0], g, WalkConfig(n_walks=500, max_steps=1, seed=2))
    assert st_.bias_warning


def test_input_validation():
    with pytest.raises(DomainError):
        wos_estimate(O2, [-1.0, 0.0], ExteriorData.const(1.0))
    with pytest.raises(DomainError):
        WalkConfig(seed=-1)
    with pytest.raises(DomainError):
        ExteriorData.box_indicator((-1.0, 0.0), (1.0, 1.0))
