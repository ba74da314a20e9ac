"""Weak identities of the half-space s-harmonic profiles.

Test functions have the form ``phi = (x_1)_+^s psi`` with ``psi`` a smooth
bump.  For such phi the fractional boundary derivative
``lim_{t->0+} phi(t e_1)/t^s`` is ``psi(0)``, and the checks compare

* ``int_{x_1>0} P_s (-Delta)^s phi``   with  ``psi(0)``,
* ``int_{x_1>0} Q_s (-Delta)^s phi``   with  ``C_s int psi(0, x') dx'``,
* ``int_{x_1>0} R_s (-Delta)^s phi``   with  ``0``.

The left-hand sides are nested integrals.  On the support of phi the inner
value is a pointwise principal value; off the support it is the plain
integral ``-c_{N,s} int phi(y) |x-y|^{-N-2s} dy``.  The far field is mapped
to ``v = X/|x|`` in (0, 1), where the integrand is a power of v times a
smooth function, and integrated by Gauss-Jacobi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DivergenceError, DomainError
from .pvlap import Growth, QuadratureSpec, ScalarField, annulus_value, pv_frac_lap
from .quadrature import graded_edges, interval_graded_rule, singular_panel_rule
from .special import FracOrder, boundary_layer_constants, c_ns, constants_for, sphere_measure

BUMP_KINDS = ("exponential", "polynomial")


def _bump_profile(kind: str, q: np.ndarray) -> np.ndarray:
    """Unit bump of ``q = |y|^2`` on the unit ball."""
    inside = q < 1.0
    if kind == "polynomial":
        return np.where(inside, np.clip(1.0 - q, 0.0, None) ** 3, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - q, 1.0)), 0.0)


@dataclass(frozen=True)
class BumpSpec:
    """``psi(x) = amplitude * b(|x - center| / radius)`` with b an exponential or
    polynomial ``(1 - r^2)^3`` bump."""

    center: tuple[float, ...]
    radius: float = 1.0
    kind: str = "exponential"
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise DomainError("bump radius must be positive")
        if self.kind not in BUMP_KINDS:
            raise DomainError(f"unknown bump kind {self.kind!r}")

    @property
    def N(self) -> int:
        return len(self.center)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = (x - np.asarray(self.center)) / self.radius
        return self.amplitude * _bump_profile(self.kind, np.sum(y * y, axis=-1))

    @property
    def sup(self) -> float:
        return abs(self.amplitude) * (math.exp(-1.0) if self.kind == "exponential" else 1.0)


@dataclass(frozen=True)
class XsCheck:
    """Numeric X_s surrogate: truncated operator values on a sample grid."""

    points: np.ndarray
    eps: tuple[float, ...]
    values: np.ndarray  # shape (points, eps)
    bound: float
    ok: bool


@dataclass(frozen=True)
class TestFunction:
    """``phi = (x_1)_+^rho_power * psi``, compactly supported in {x_1 >= 0}.

    Either ``bump`` is set (closed-form profile) or ``custom`` gives phi
    directly, in which case ``psi`` may be unknown.
    """

    __test__ = False  # not a pytest class

    N: int
    rho_power: float
    support_radius: float
    bump: BumpSpec | None = None
    custom: Callable[[np.ndarray], np.ndarray] | None = None
    xs_check: XsCheck | None = field(default=None, compare=False)

    def psi(self, x) -> np.ndarray:
        if self.bump is None:
            raise DomainError("profile psi is only known for bump test functions")
        return self.bump(x)

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.custom is not None:
            return np.asarray(self.custom(x), dtype=float)
        return np.clip(x[..., 0], 0.0, None) ** self.rho_power * self.bump(x)

    __call__ = value

    @property
    def psi_sup(self) -> float:
        if self.bump is not None:
            return self.bump.sup
        return self.custom_sup

    @property
    def custom_sup(self) -> float:
        # sampled sup of |phi| / rho^s along the support, for custom functions
        pts = _sample_grid(self.N, self.support_radius, 33)
        x1 = np.clip(pts[..., 0], 1e-12, None)
        return float(np.max(np.abs(self.value(pts)) / x1**self.rho_power))

    def scaled(self, factor: float) -> "TestFunction":
        """``factor * phi``."""
        if self.bump is not None:
            return replace(self, bump=replace(self.bump, amplitude=self.bump.amplitude * factor), xs_check=None)
        f = self.custom
        return replace(self, custom=lambda x: factor * f(x), xs_check=None)

    def dilated(self, lam: float) -> "TestFunction":
        """``phi(lam x)``, again of the form ``(x_1)_+^s psi_lam``."""
        if not lam > 0:
            raise DomainError("dilation factor must be positive")
        if self.bump is not None:
            b = self.bump
            nb = BumpSpec(tuple(c / lam for c in b.center), b.radius / lam, b.kind, b.amplitude * lam**self.rho_power)
            return replace(self, bump=nb, support_radius=self.support_radius / lam, xs_check=None)
        f = self.custom
        return replace(self, custom=lambda x: f(lam * np.asarray(x)), support_radius=self.support_radius / lam, xs_check=None)

    @property
    def touches_boundary(self) -> bool:
        if self.bump is None:
            return True
        return self.bump.center[0] < self.bump.radius

    def field(self) -> ScalarField:
        planes = (0.0,) if self.touches_boundary else ()
        return ScalarField(
            self.value,
            self.N,
            Growth.compact(self.support_radius),
            singular_planes=planes,
            name="phi",
            plane_exponent=self.rho_power,
        )


def _sample_grid(N: int, radius: float, n: int) -> np.ndarray:
    g1 = np.linspace(0.0, radius, n)
    if N == 1:
        return g1[:, None]
    g2 = np.linspace(-radius, radius, n)
    grids = np.meshgrid(g1, *([g2] * (N - 1)), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def truncated_frac_lap(order: FracOrder, phi: TestFunction, x, eps: float, spec: QuadratureSpec | None = None) -> float:
    """``c int_{|z|>eps} (phi(x) - phi(x+z)) |z|^{-N-2s} dz`` (no limit taken)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    R = float(np.linalg.norm(x)) + phi.support_radius
    R = max(R, 2.0 * eps)
    inner = annulus_value(order, phi.field(), x, eps, R, spec)
    ux = float(phi.value(x[None, :])[0])
    # beyond R only phi(x) remains
    tail = ux * sphere_measure(order.N) * R ** (-2.0 * order.s) / (2.0 * order.s)
    return inner + c_ns(order.N, order.s) * tail


def xs_surrogate(
    order: FracOrder, phi: TestFunction, eps=(1e-1, 1e-2, 1e-3), n_points: int = 5, growth_factor: float = 4.0
) -> XsCheck:
    """Uniform-bound surrogate: the truncated operator on sample points of the
    support must not grow as eps shrinks beyond ``growth_factor`` times its
    coarse-eps size."""
    if phi.bump is not None:
        c, r = np.asarray(phi.bump.center), phi.bump.radius
        lo = max(c[0] - r, 0.0)
        x1 = lo + (c[0] + r - lo) * (np.arange(1, n_points + 1) / (n_points + 1.0))
        pts = np.tile(c, (n_points, 1))
        pts[:, 0] = x1
    else:
        pts = np.zeros((n_points, phi.N))
        pts[:, 0] = phi.support_radius * (np.arange(1, n_points + 1) / (n_points + 1.0))
    spec = QuadratureSpec(levels=2, refine_check=False)
    vals = np.array([[truncated_frac_lap(order, phi, p, e, spec) for e in eps] for p in pts])
    finite = bool(np.all(np.isfinite(vals)))
    coarse = np.max(np.abs(vals[:, :2]), axis=1)
    ok = finite and bool(np.all(np.abs(vals[:, -1]) <= growth_factor * coarse + 1e-12))
    bound = float(np.max(np.abs(vals))) if finite else math.inf
    return XsCheck(pts, tuple(eps), vals, bound, ok)


def make_test_function(
    bump: BumpSpec | None = None,
    s: float = 0.5,
    *,
    custom: Callable[[np.ndarray], np.ndarray] | None = None,
    N: int | None = None,
    support_radius: float | None = None,
    check: bool = True,
) -> TestFunction:
    """Build ``phi = (x_1)_+^s psi`` from a bump, or wrap a custom phi.

    For a custom phi, ``N`` and ``support_radius`` are required and phi must
    vanish on {x_1 < 0}; sampled leakage raises :class:`DomainError`.  With
    ``check`` the X_s conditions are verified: vanishing on the left half
    space, continuity of ``rho^{-s} phi`` (exact for bumps, sampled otherwise)
    and the truncated-operator bound on a sample grid.
    """
    if not 0.0 < s < 1.0:
        raise DomainError("rho power must lie in (0, 1)")
    if bump is not None:
        if custom is not None:
            raise DomainError("give either a bump or a custom function")
        rad = float(np.linalg.norm(bump.center)) + bump.radius
        phi = TestFunction(bump.N, s, rad, bump=bump)
    else:
        if custom is None or N is None or support_radius is None:
            raise DomainError("custom test functions need N and support_radius")
        phi = TestFunction(int(N), s, float(support_radius), custom=custom)
        pts = _sample_grid(phi.N, phi.support_radius, 17)
        left = pts.copy()
        left[:, 0] = -left[:, 0] - 1e-9
        if np.any(phi.value(left) != 0.0):
            raise DomainError("test function support leaks into {x_1 < 0}")
    if check:
        order = FracOrder(phi.N, s, allow_log=True, allow_recurrent=True)
        phi = replace(phi, xs_check=xs_surrogate(order, phi))
    return phi


def frac_boundary_derivative(phi: TestFunction, k_min: int = 4, k_max: int = 40, rtol: float = 1e-6) -> float:
    """``lim_{t->0+} phi(t e_1) / t^s``.

    Exact ``psi(0)`` for bump test functions; otherwise Aitken extrapolation of
    the ratios at ``t = 2^-k``.  Ratios whose increments do not shrink raise
    :class:`DivergenceError`.
    """
    if phi.bump is not None:
        return float(phi.bump(np.zeros(phi.N)))
    s = phi.rho_power
    ks = np.arange(k_min, k_max + 1)
    t = 2.0 ** (-ks.astype(float))
    pts = np.zeros((t.size, phi.N))
    pts[:, 0] = t
    g = phi.value(pts) / t**s
    d = np.diff(g)
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.all(np.abs(d[-4:]) <= rtol * scale * 1e-3):
        return float(g[-1])
    if not np.all(np.abs(d[-4:-1]) > np.abs(d[-3:]) * (1.0 + 1e-9)):
        raise DivergenceError("boundary derivative ratios do not settle")
    # Aitken on the last three ratios
    g0, g1, g2 = g[-3:]
    den = g2 - 2.0 * g1 + g0
    est = g2 - (g2 - g1) ** 2 / den if den != 0.0 else g2
    g0, g1, g2 = g[-4:-1]
    den = g2 - 2.0 * g1 + g0
    prev = g2 - (g2 - g1) ** 2 / den if den != 0.0 else g2
    if abs(est - prev) > rtol * max(1.0, abs(est)):
        raise DivergenceError("boundary derivative extrapolation does not settle")
    return float(est)


# ----------------------------------------------------------- nested quadrature


@dataclass(frozen=True)
class IdentityBudget:
    """Outer quadrature controls.

    ``panels`` is the number of panels per bump radius on the support,
    ``order`` the Gauss order per panel, ``far_nodes`` the Gauss-Jacobi order
    of the mapped far field, ``angular_panels`` the panels in the polar angle
    (N = 2) and ``angular_levels`` their grading depth.  ``inner`` drives the pointwise principal values.
    """

    order: int = 8
    panels: int = 16
    grading_levels: int = 14
    grading_ratio: float = 0.2
    far_nodes: int = 24
    angular_panels: int = 8
    angular_levels: int = 2
    inner: QuadratureSpec = field(default_factory=QuadratureSpec)

    def refined(self) -> "IdentityBudget":
        return replace(
            self,
            order=self.order + 4,
            panels=2 * self.panels,
            grading_levels=self.grading_levels + 6,
            far_nodes=self.far_nodes + 8,
            angular_panels=2 * self.angular_panels,
            inner=self.inner.refined(),
        )

    @classmethod
    def small(cls) -> "IdentityBudget":
        """A coarse budget for N = 2 runs."""
        return cls(
            order=4, panels=2, grading_levels=4, far_nodes=12, angular_panels=3, angular_levels=1,
            inner=QuadratureSpec(levels=4, angular_min=16, radial_order=6, refine_check=False, tol=1e-3),
        )


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    abs_gap: float
    rel_gap: float
    budgets: dict
    constant_mode: str
    # right-hand sides under the other available constants
    alternatives: dict = field(default_factory=dict)

    @classmethod
    def build(cls, lhs: float, rhs: float, scale: float, budgets: dict, mode: str, alternatives=None) -> "IdentityReport":
        gap = abs(lhs - rhs)
        ref = abs(rhs) if rhs != 0.0 else scale
        budgets = dict(budgets, rel_reference="|rhs|" if rhs != 0.0 else "sup|psi|")
        return cls(lhs, rhs, gap, gap / ref if ref > 0 else math.inf, budgets, mode, dict(alternatives or {}))


@dataclass(frozen=True)
class _Weight:
    """Half-space weight ``pref x_1^a_plane |x|^(a_radial - a_plane)``."""

    pref: float
    a_plane: float
    a_radial: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x1 = x[..., 0]
        r = np.sqrt(np.sum(x * x, axis=-1))
        return self.pref * x1**self.a_plane * r ** (self.a_radial - self.a_plane)


class _Exterior:
    """``-c int phi(y) |x-y|^{-N-2s} dy`` for x off the support of phi."""

    def __init__(self, order: FracOrder, phi: TestFunction, budget: IdentityBudget):
        self.N, self.s = order.N, order.s
        self.c = c_ns(order.N, order.s)
        b = phi.bump
        if b is None:
            lo1, hi1 = 0.0, phi.support_radius
            cen = np.zeros(phi.N)
            rad = phi.support_radius
        else:
            cen, rad = np.asarray(b.center), b.radius
            lo1, hi1 = max(cen[0] - rad, 0.0), cen[0] + rad
        mw = rad / budget.panels
        sing = [(0.0, phi.rho_power)] if lo1 == 0.0 else []
        e, sg = graded_edges(lo1, hi1, sing, budget.grading_levels, budget.grading_ratio, max_width=mw)
        y1, w1 = singular_panel_rule(e, budget.order, sg)
        y1, w1 = y1.ravel(), w1.ravel()
        if self.N == 1:
            y, w = y1[:, None], w1
        else:
            e2, _ = graded_edges(cen[1] - rad, cen[1] + rad, (), max_width=mw)
            y2, w2 = singular_panel_rule(e2, budget.order, {})
            y2, w2 = y2.ravel(), w2.ravel()
            Y1, Y2 = np.meshgrid(y1, y2, indexing="ij")
            y = np.stack([Y1.ravel(), Y2.ravel()], axis=-1)
            w = (w1[:, None] * w2[None, :]).ravel()
        mass = w * phi.value(y)
        keep = mass != 0.0
        self.y, self.m = y[keep], mass[keep]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0])
        for i in range(0, x.shape[0], 256):
            xx = x[i : i + 256]
            d2 = np.sum((xx[:, None, :] - self.y[None, :, :]) ** 2, axis=-1)
            out[i : i + 256] = -self.c * (d2 ** (-(self.N + 2 * self.s) / 2.0)) @ self.m
        return out


class _Inner:
    """Pointwise ``(-Delta)^s phi`` on the support with diagnostics."""

    def __init__(self, order: FracOrder, phi: TestFunction, budget: IdentityBudget):
        self.order, self.u, self.spec = order, phi.field(), budget.inner
        self.evals = 0
        self.max_err = 0.0
        self.count = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0])
        for i, p in enumerate(x):
            r = pv_frac_lap(self.order, self.u, p, self.spec)
            if r.diverging:
                raise DivergenceError(f"inner principal value does not settle at x={p.tolist()}")
            out[i] = r.value
            self.evals += r.budget
            self.max_err = max(self.max_err, r.error_estimate)
            self.count += 1
        return out


def _support_box(phi: TestFunction) -> tuple[np.ndarray, float, float, float]:
    if phi.bump is None:
        return np.zeros(phi.N), phi.support_radius, 0.0, phi.support_radius
    c, r = np.asarray(phi.bump.center), phi.bump.radius
    return c, r, max(c[0] - r, 0.0), c[0] + r


def _in_support(phi: TestFunction, x: np.ndarray) -> np.ndarray:
    c, r, lo, hi = _support_box(phi)
    if phi.bump is None:
        return np.linalg.norm(x, axis=-1) < r
    return np.sum((x - c) ** 2, axis=-1) < r * r


def _far_field(W: _Weight, ext: _Exterior, N: int, s: float, X: float, budget: IdentityBudget, theta_rule) -> float:
    """``int_{|x|>X} W (-Delta)^s phi`` through ``|x| = X/v``, v in (0, 1)."""
    from scipy.special import roots_jacobi

    beta = 2.0 * s - W.a_radial - 1.0
    v, wv = roots_jacobi(budget.far_nodes, 0.0, beta)
    # nodes on (0,1) with the weight v^beta absorbed
    v = 0.5 * (v + 1.0)
    wv = wv * 0.5 ** (1.0 + beta)
    rho = X / v
    jac = X / v**2
    scale = wv * v ** (-beta)
    if N == 1:
        x = rho[:, None]
        return float(np.sum(scale * jac * W(x) * ext(x)))
    th, wt = theta_rule(None)
    total = 0.0
    for r_, j_, sc in zip(rho, jac, scale):
        x = np.stack([r_ * np.cos(th), r_ * np.sin(th)], axis=-1)
        total += sc * j_ * r_ * float(np.sum(wt * W(x) * ext(x)))
    return total


def _weighted_integral(order: FracOrder, phi: TestFunction, W: _Weight, budget: IdentityBudget):
    """``int_{x_1>0} W(x) (-Delta)^s phi(x) dx`` and diagnostics."""
    N, s = order.N, order.s
    if phi.N != N:
        raise DomainError("test function dimension does not match the order")
    if N > 2:
        raise DomainError("weak identities are checked for N = 1 or N = 2")
    c, r, lo, hi = _support_box(phi)
    ext = _Exterior(order, phi, budget)
    inner = _Inner(order, phi, budget)
    mw = r / budget.panels

    def inner_or_ext(x):
        out = np.empty(x.shape[0])
        ins = _in_support(phi, x)
        if np.any(ins):
            out[ins] = inner(x[ins])
        if np.any(~ins):
            out[~ins] = ext(x[~ins])
        return out

    if N == 1:
        rho_hi = hi
        e, sg = graded_edges(
            0.0, rho_hi, [(0.0, W.a_radial)], budget.grading_levels, budget.grading_ratio, max_width=mw, fixed=(lo,)
        )
        x, w = singular_panel_rule(e, budget.order, sg)
        x, w = x.ravel()[:, None], w.ravel()
        near = float(np.sum(w * W(x) * inner_or_ext(x)))
        e, sg = graded_edges(rho_hi, 2.0 * rho_hi, [rho_hi], budget.grading_levels, budget.grading_ratio, max_width=mw)
        x, w = singular_panel_rule(e, budget.order, sg)
        x, w = x.ravel()[:, None], w.ravel()
        mid = float(np.sum(w * W(x) * ext(x)))
        far = _far_field(W, ext, 1, s, 2.0 * rho_hi, budget, None)
    else:
        rho_hi = float(np.linalg.norm(c)) + r
        half = 0.5 * math.pi

        def theta_rule(rho):
            breaks = [(-half, W.a_plane), (half, W.a_plane)]
            if rho is not None and phi.bump is not None:
                # angles where the circle |x| = rho meets the support circle
                dc = float(np.linalg.norm(c))
                if dc > 0 and abs(dc - rho) < r < dc + rho:
                    cosang = (rho * rho + dc * dc - r * r) / (2.0 * rho * dc)
                    a0 = math.atan2(c[1], c[0])
                    da = math.acos(max(-1.0, min(1.0, cosang)))
                    breaks += [(a, 0.0) for a in (a0 - da, a0 + da) if -half < a < half]
            n_min = budget.angular_panels * budget.order
            return interval_graded_rule(-half, half, breaks, n_min, budget.order, budget.angular_levels, budget.grading_ratio)

        radial_breaks = [(0.0, W.a_radial + 1.0)]
        dc = float(np.linalg.norm(c))
        fixed = tuple(v for v in (dc - r, dc, dc + r) if 0.0 < v < rho_hi)
        e, sg = graded_edges(0.0, rho_hi, radial_breaks, budget.grading_levels, budget.grading_ratio, max_width=mw, fixed=fixed)
        rr, wr = singular_panel_rule(e, budget.order, sg)
        near = 0.0
        for r_, w_ in zip(rr.ravel(), wr.ravel()):
            th, wt = theta_rule(r_)
            x = np.stack([r_ * np.cos(th), r_ * np.sin(th)], axis=-1)
            near += w_ * r_ * float(np.sum(wt * W(x) * inner_or_ext(x)))
        e, sg = graded_edges(rho_hi, 2.0 * rho_hi, [rho_hi], budget.grading_levels, budget.grading_ratio, max_width=mw)
        rr, wr = singular_panel_rule(e, budget.order, sg)
        mid = 0.0
        th, wt = theta_rule(None)
        for r_, w_ in zip(rr.ravel(), wr.ravel()):
            x = np.stack([r_ * np.cos(th), r_ * np.sin(th)], axis=-1)
            mid += w_ * r_ * float(np.sum(wt * W(x) * ext(x)))
        far = _far_field(W, ext, 2, s, 2.0 * rho_hi, budget, theta_rule)
    diag = {
        "near": float(near),
        "mid": float(mid),
        "far": float(far),
        "inner_points": inner.count,
        "inner_evaluations": inner.evals,
        "inner_max_error": inner.max_err,
    }
    return near + mid + far, diag


def _lhs(order, phi, W, budget):
    budget = budget or IdentityBudget()
    return _weighted_integral(order, phi, W, budget)


def check_identity_ps(
    order: FracOrder, phi: TestFunction, budget: IdentityBudget | None = None, constant_mode: str = "paper"
) -> IdentityReport:
    """``int P_s (-Delta)^s phi`` against the fractional boundary derivative.

    ``constant_mode`` selects the prefactor of P_s: ``paper`` (printed K_s) or
    ``weak`` (the value that closes the identity).  The left side for the
    other prefactor is reported in ``alternatives``.
    """
    consts = constants_for(order)
    prefs = {"paper": consts.K_s_paper, "weak": consts.K_s_weak}
    if constant_mode not in prefs:
        raise DomainError(f"unknown constant mode {constant_mode!r}")
    N, s = order.N, order.s
    W = _Weight(1.0, s, s - N)
    base, diag = _lhs(order, phi, W, budget)
    rhs = frac_boundary_derivative(phi)
    lhs = prefs[constant_mode] * base
    alt = {f"lhs[{m}]": float(p * base) for m, p in prefs.items()}
    return IdentityReport.build(lhs, rhs, phi.psi_sup, diag, constant_mode, alt)


def boundary_trace_integral(phi: TestFunction) -> float:
    """``int_{R^{N-1}} d^s phi(0, x') dx'`` (the boundary derivative itself for N = 1)."""
    if phi.N == 1:
        return frac_boundary_derivative(phi)
    if phi.bump is None:
        raise DomainError("boundary trace integral needs a bump profile for N > 1")
    from scipy import integrate

    b = phi.bump
    lo, hi = b.center[1] - b.radius, b.center[1] + b.radius
    val, _ = integrate.quad(lambda t: float(b(np.array([0.0, t]))), lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def check_identity_qs(
    order: FracOrder, phi: TestFunction, constant_mode: str = "derived", budget: IdentityBudget | None = None
) -> IdentityReport:
    """``int Q_s (-Delta)^s phi`` against ``C_s int d^s phi(0, x') dx'``.

    ``constant_mode`` is ``derived`` (C_2/C_1), ``paper`` (printed C_s) or
    ``weak`` (the value that closes the identity); right-hand sides for all
    three are reported in ``alternatives``.
    """
    consts = constants_for(order)
    cs = {"derived": consts.C_s_derived, "paper": consts.C_s_paper, "weak": consts.C_s_weak}
    if constant_mode not in cs:
        raise DomainError(f"unknown constant mode {constant_mode!r}")
    s = order.s
    W = _Weight(1.0, s - 1.0, s - 1.0)
    lhs, diag = _lhs(order, phi, W, budget)
    trace = boundary_trace_integral(phi)
    alt = {f"rhs[{m}]": float(v * trace) for m, v in cs.items()}
    scale = phi.psi_sup * (1.0 if order.N == 1 else 2.0 * (phi.bump.radius if phi.bump else phi.support_radius))
    return IdentityReport.build(lhs, cs[constant_mode] * trace, scale, diag, constant_mode, alt)


def check_identity_rs(order: FracOrder, phi: TestFunction, budget: IdentityBudget | None = None) -> IdentityReport:
    """``int R_s (-Delta)^s phi``, which vanishes."""
    s = order.s
    W = _Weight(1.0, s, s)
    lhs, diag = _lhs(order, phi, W, budget)
    return IdentityReport.build(lhs, 0.0, phi.psi_sup, diag, "none")


def cs_ratio_numeric(N: int, s: float) -> float:
    """``C_2 / C_1`` from the boundary-layer planar moments with the printed K_s."""
    if N < 2:
        raise DomainError("cs_ratio_numeric needs N >= 2")
    order = FracOrder(N, s)
    C1, C2 = boundary_layer_constants(order, constants_for(order).K_s_paper)
    return C2 / C1
