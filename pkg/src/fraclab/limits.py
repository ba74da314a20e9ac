"""Convergence studies for the kernel limits that produce P_s, Q_s and R_s.

Each study evaluates an error field on a deterministic lattice (33 points per
axis) over a compact box in the open half space, records the sup error and
the weighted L^1_s norm of the error for every grid value of the parameter,
and fits a log-log rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .errors import DomainError
from .kernels import (
    BoundaryLayerMeasure,
    NormMode,
    fundamental_ps,
    green_halfspace,
    poisson_halfspace,
    poisson_superposition,
)
from .pvlap import Growth, QuadratureSpec, ScalarField, weighted_l1s_norm
from .special import FracOrder, boundary_layer_constants, constants_for

LATTICE_POINTS = 33


@dataclass(frozen=True)
class CompactBox:
    """Axis-aligned box ``[lo_i, hi_i]`` with ``lo_1 > 0``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise DomainError("box corners must have equal positive dimension")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise DomainError("box must have lo < hi on every axis")
        if not self.lo[0] > 0:
            raise DomainError("box must lie strictly inside the half space (lo_1 > 0)")

    @property
    def N(self) -> int:
        return len(self.lo)

    def lattice(self, n: int = LATTICE_POINTS) -> np.ndarray:
        axes = [np.linspace(a, b, n) for a, b in zip(self.lo, self.hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    @classmethod
    def default(cls, N: int) -> "CompactBox":
        return cls((0.5,) + (-1.0,) * (N - 1), (2.0,) + (1.0,) * (N - 1))


@dataclass(frozen=True)
class RateFit:
    slope: float
    half_width: float
    intercept: float


def rate_fit(params: Sequence[float], errors: Sequence[float], confidence: float = 0.95) -> RateFit:
    """Least-squares slope of ``log error`` against ``log param``.

    The half-width is the Student-t confidence half-width of the slope.
    """
    p = np.asarray(params, dtype=float)
    e = np.asarray(errors, dtype=float)
    if p.size != e.size or p.size < 3:
        raise DomainError("rate_fit needs at least three (parameter, error) pairs")
    if np.any(e <= 0) or np.any(p <= 0):
        raise DomainError("rate_fit needs positive parameters and errors")
    lx, ly = np.log(p), np.log(e)
    res = stats.linregress(lx, ly)
    dof = p.size - 2
    half = float(stats.t.ppf(0.5 + confidence / 2.0, dof) * res.stderr) if dof > 0 else math.inf
    return RateFit(float(res.slope), half, float(res.intercept))


@dataclass(frozen=True)
class ConvergenceStudy:
    study: str
    N: int
    s: float
    eps_grid: tuple[float, ...]
    compact_set: CompactBox
    sup_errors: tuple[float, ...]
    l1s_errors: tuple[float, ...]
    fitted_rate: float
    rate_half_width: float
    l1s_rate: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.eps_grid)
        if not np.all(np.diff(g) < 0):
            raise DomainError("eps grid must be strictly decreasing")

    @property
    def l1s_monotone(self) -> bool:
        return bool(np.all(np.diff(self.l1s_errors) < 0))

    @property
    def sup_monotone(self) -> bool:
        return bool(np.all(np.diff(self.sup_errors) < 0))

    def rows(self) -> list[dict]:
        return [
            dict(study=self.study, N=self.N, s=self.s, eps=e, sup_error=se, l1s_error=le, fitted_rate=self.fitted_rate)
            for e, se, le in zip(self.eps_grid, self.sup_errors, self.l1s_errors)
        ]


def _check_grid(eps_grid: Sequence[float], box: CompactBox, order: FracOrder) -> tuple[float, ...]:
    g = tuple(float(e) for e in eps_grid)
    if len(g) < 2 or any(e <= 0 for e in g):
        raise DomainError("parameter grid needs at least two positive values")
    if not all(a > b for a, b in zip(g[:-1], g[1:])):
        raise DomainError("parameter grid must be strictly decreasing")
    if box.N != order.N:
        raise DomainError("box dimension does not match N")
    return g


def _l1s(order: FracOrder, f: Callable, planes, points, plane_exp: float, point_exp: float | None, spec) -> float:
    u = ScalarField(
        f, order.N, Growth.weighted(), singular_planes=planes, singular_points=points,
        plane_exponent=plane_exp, point_exponent=point_exp,
    )
    return float(weighted_l1s_norm(order, u, spec).value)


def _study(order, name, grid, box, err_fn, sing_fn, l1s: bool, spec, extra) -> ConvergenceStudy:
    pts = box.lattice()
    sups, norms = [], []
    for e in grid:
        sups.append(float(np.max(np.abs(err_fn(pts, e)))))
        if l1s:
            planes, points, pe, qe = sing_fn(e)
            norms.append(_l1s(order, lambda x, e=e: err_fn(x, e), planes, points, pe, qe, spec))
    fit = rate_fit(grid, sups) if len(grid) >= 3 else RateFit(math.nan, math.inf, math.nan)
    l1_rate = rate_fit(grid, norms).slope if l1s and len(grid) >= 3 and min(norms) > 0 else None
    return ConvergenceStudy(
        name, order.N, order.s, grid, box, tuple(sups), tuple(norms if l1s else [math.nan] * len(grid)),
        fit.slope, fit.half_width, l1_rate, extra,
    )


def _half_space(fn):
    def wrapped(x, *a):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        pos = x[..., 0] > 0
        if np.any(pos):
            out[pos] = fn(x[pos], *a)
        return out

    return wrapped


def green_leading_constant(order: FracOrder, x=None, eps_grid=(1e-3, 5e-4, 2.5e-4, 1.25e-4)) -> float:
    """``lim eps^{-s} G(x, eps e_1) / (x_1^s |x|^{-N})`` by Richardson extrapolation
    (error linear in eps)."""
    N, s = order.N, order.s
    x = np.asarray(x if x is not None else [1.0] + [0.0] * (N - 1), dtype=float)
    vals = []
    for e in eps_grid:
        y = np.zeros(N)
        y[0] = e
        g = float(green_halfspace(order, x, y))
        vals.append(e ** (-s) * g / (x[0] ** s * float(np.sum(x * x)) ** (-N / 2.0)))
    E = list(vals)
    ratios = [eps_grid[k] / eps_grid[k + 1] for k in range(len(eps_grid) - 1)]
    for p in (1.0, 2.0):
        E = [E[k + 1] + (E[k + 1] - E[k]) / (ratios[k] ** p - 1.0) for k in range(len(E) - 1)]
        ratios = ratios[1:]
    return float(E[-1])


def green_limit_study(
    order: FracOrder, eps_grid=(1e-1, 1e-2, 1e-3, 1e-4), compact_set: CompactBox | None = None,
    l1s: bool = True, spec: QuadratureSpec | None = None,
) -> ConvergenceStudy:
    """Errors of ``eps^{-s} G(x, eps e_1) - P_s(x)`` with the printed K_s."""
    N, s = order.N, order.s
    box = compact_set or CompactBox.default(N)
    grid = _check_grid(eps_grid, box, order)
    if grid[0] >= min(0.125, box.lo[0] / 2.0):
        raise DomainError("eps too large: need eps < 1/8 and 2 eps below the box")
    K = constants_for(order).K_s_paper

    @_half_space
    def err(x, e):
        y = np.zeros(N)
        y[0] = e
        g = np.asarray(green_halfspace(order, x, y), dtype=float)
        return e ** (-s) * g - np.asarray(fundamental_ps(order, x, K), dtype=float)

    def sing(e):
        return (0.0,), (tuple([e] + [0.0] * (N - 1)), tuple([0.0] * N)), s, s - N

    consts = constants_for(order)
    extra = {
        "K_s_paper": K,
        "leading_constant": green_leading_constant(order),
        # (kappa/2) 4^s / s from the small-psi expansion of the Green integral
        "series_constant": 0.5 * consts.kappa_ns * 4.0**s / s,
    }
    return _study(order, "green", grid, box, err, sing, l1s, spec, extra)


def poisson_limit_study(
    order: FracOrder, eps_grid=(1e-1, 1e-2, 1e-3, 1e-4), compact_set: CompactBox | None = None,
    l1s: bool = True, spec: QuadratureSpec | None = None,
) -> ConvergenceStudy:
    """Errors of ``eps^s P(x, -eps e_1) - P_s(x) = K_s x_1^s (|x + eps e_1|^{-N} - |x|^{-N})``."""
    N, s = order.N, order.s
    box = compact_set or CompactBox.default(N)
    grid = _check_grid(eps_grid, box, order)
    K = constants_for(order).K_s_paper

    @_half_space
    def err(x, e):
        y = np.zeros(N)
        y[0] = -e
        p = np.asarray(poisson_halfspace(order, x, y, NormMode.PAPER_K), dtype=float)
        return e**s * p - np.asarray(fundamental_ps(order, x, K), dtype=float)

    def sing(e):
        return (0.0,), (tuple([0.0] * N),), s, s - N

    return _study(order, "poisson", grid, box, err, sing, l1s, spec, {"K_s_paper": K})


class Layer(str, enum.Enum):
    MU = "mu"
    NU = "nu"


def boundary_layer_study(
    order: FracOrder, layer, t_grid=(1e-1, 1e-2, 1e-3, 1e-4), compact_set: CompactBox | None = None,
    l1s: bool = True, spec: QuadratureSpec | None = None, norm_mode=NormMode.PAPER_K, cross_checks: int = 2,
) -> ConvergenceStudy:
    """Planar-layer limits.

    ``mu``: errors of ``P[mu_t] - C_1 x_1^{s-1}`` as t decreases.
    ``nu``: ``P[nu_t] = C_1 x_1^s t/(x_1+t)`` tends to ``C_1 x_1^s`` only as t
    grows, so the grid holds ``tau = 1/t`` and the errors are those of
    ``P[nu_{1/tau}] - C_1 x_1^s``.

    ``cross_checks`` lattice points are also evaluated by direct quadrature
    of the kernel over the layer; their largest relative deviation from the
    closed form is reported in ``extra``.
    """
    N, s = order.N, order.s
    layer = Layer(layer)
    box = compact_set or CompactBox.default(N)
    grid = _check_grid(t_grid, box, order)
    from .kernels import poisson_prefactor

    C1, _ = boundary_layer_constants(order, poisson_prefactor(order, norm_mode))

    def measure(p):
        return BoundaryLayerMeasure.layer_mu(p) if layer is Layer.MU else BoundaryLayerMeasure.layer_nu(1.0 / p)

    @_half_space
    def err(x, p):
        x1 = x[..., 0]
        if layer is Layer.MU:
            return C1 * x1**s / (x1 + p) - C1 * x1 ** (s - 1.0)
        t = 1.0 / p
        return C1 * x1**s * t / (x1 + t) - C1 * x1**s

    def sing(p):
        return (0.0,), (), (s - 1.0 if layer is Layer.MU else s), None

    pts = box.lattice()
    picks = pts[np.linspace(0, len(pts) - 1, max(cross_checks, 0), dtype=int)] if cross_checks else pts[:0]
    dev = 0.0
    for p in (grid[0], grid[-1]):
        for x in picks:
            closed = poisson_superposition(order, x, measure(p), norm_mode, method="closed")
            quad = poisson_superposition(order, x, measure(p), norm_mode, method="quadrature")
            dev = max(dev, abs(quad - closed) / abs(closed))
    # normalized statement: C_1^{-1} P[mu_t] -> Q_s on the box
    x1 = pts[:, 0]
    normalized = max(
        float(np.max(np.abs(x1**s / (x1 + t) - x1 ** (s - 1.0)))) for t in grid[-1:]
    ) if layer is Layer.MU else math.nan
    extra = {
        "C1": C1,
        "parameter": "t" if layer is Layer.MU else "1/t",
        "quadrature_max_rel_dev": dev,
        "normalized_sup_error_at_last": normalized,
    }
    return _study(order, f"layer_{layer.value}", grid, box, err, sing, l1s, spec, extra)
