from __future__ import annotations

import math

import numpy as np
import pytest

from fraclab.errors import DomainError
from fraclab.limits import (
    CompactBox,
    ConvergenceStudy,
    Layer,
    boundary_layer_study,
    green_leading_constant,
    green_limit_study,
    poisson_limit_study,
    rate_fit,
)
from fraclab.special import FracOrder, constants_for

GRID = (1e-1, 1e-2, 1e-3)


def test_rate_fit_recovers_slope():
    eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    fit = rate_fit(eps, 3.0 * eps**0.7)
    assert fit.slope == pytest.approx(0.7, abs=1e-12)
    with pytest.raises(DomainError):
        rate_fit(eps[:2], eps[:2])
    with pytest.raises(DomainError):
        rate_fit(eps, -eps)


def test_compact_box_validation():
    with pytest.raises(DomainError):
        CompactBox((0.0, -1.0), (1.0, 1.0))
    box = CompactBox.default(2)
    pts = box.lattice(5)
    assert pts.shape == (25, 2) and np.all(pts[:, 0] >= 0.5)


def test_grid_must_decrease():
    with pytest.raises(DomainError):
        poisson_limit_study(FracOrder(2, 0.5), (1e-3, 1e-2, 1e-1))


def test_poisson_limit_rate_one():
    st = poisson_limit_study(FracOrder(2, 0.5), GRID + (1e-4,), l1s=False)
    assert st.fitted_rate == pytest.approx(1.0, abs=0.1)
    assert st.sup_monotone
    rows = st.rows()
    assert rows[0].keys() == {"study", "N", "s", "eps", "sup_error", "l1s_error", "fitted_rate"}


@pytest.mark.parametrize("s", [0.25, 0.75])
def test_green_limit_leading_constant(s):
    o = FracOrder(2, s)
    K = constants_for(o).K_s_paper
    assert green_leading_constant(o) == pytest.approx(K, rel=1e-6)


def test_green_limit_sup_rate_is_one():
    st = green_limit_study(FracOrder(2, 0.25), GRID + (1e-4,), l1s=False)
    # the sup error on compacts decays linearly in eps
    assert st.fitted_rate == pytest.approx(1.0, abs=0.1)
    assert st.extra["series_constant"] == pytest.approx(st.extra["K_s_paper"], rel=1e-12)


def test_green_eps_too_large_rejected():
    with pytest.raises(DomainError):
        green_limit_study(FracOrder(2, 0.5), (0.5, 0.1, 0.01))


@pytest.mark.parametrize("layer", [Layer.MU, Layer.NU])
def test_boundary_layers_rate_one(layer):
    st = boundary_layer_study(FracOrder(2, 0.5), layer, (1e-1, 1e-2, 1e-3), l1s=False)
    assert isinstance(st, ConvergenceStudy)
    assert st.fitted_rate == pytest.approx(1.0, abs=0.1)
    assert st.extra["quadrature_max_rel_dev"] < 1e-6
