"""Closed-form Green kernels, Poisson kernels and boundary-layer superpositions.

Points are arrays whose last axis has length N; the first coordinate is the
distance to the hyperplane {x_1 = 0}.  All kernels broadcast over leading
axes.  A scalar query that hits a singular configuration returns a
:class:`~fraclab.errors.SingularValue`; batched queries carry ``inf`` in
those slots.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, SingularValue
from .special import (
    FracOrder,
    boundary_layer_constants,
    constants_for,
    inc_beta,
    planar_moment,
    sphere_measure,
)


class NormMode(str, enum.Enum):
    """Prefactor of the Poisson kernels.

    ``PAPER_K`` uses K_s = kappa 2^{2s-1}/s as printed; ``PROBABILISTIC``
    uses kappa_{N,s}, which makes the ball kernel a probability density.
    """

    PAPER_K = "paper"
    PROBABILISTIC = "probabilistic"

    @classmethod
    def coerce(cls, value) -> "NormMode":
        if isinstance(value, cls):
            return value
        aliases = {"paper_k": cls.PAPER_K, "probabilistic_kappa": cls.PROBABILISTIC}
        key = str(value).lower()
        return aliases.get(key) or cls(key)


def poisson_prefactor(order: FracOrder, norm_mode) -> float:
    consts = constants_for(order)
    if NormMode.coerce(norm_mode) is NormMode.PAPER_K:
        return consts.K_s_paper
    return consts.kappa_ns


def _pts(x, N: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] != N:
        raise DomainError(f"point dimension {arr.shape[-1]} does not match N={N}")
    return arr


def _finish(values: np.ndarray, singular: np.ndarray, reason: str):
    values = np.where(singular, np.inf, values)
    if values.ndim == 0:
        return SingularValue(reason) if bool(singular) else float(values)
    return values


@dataclass(frozen=True)
class GreenGeometry:
    psi: np.ndarray | float
    psi_R: np.ndarray | float
    psi_inf: np.ndarray | float


def green_geometry(x, y, r: float = 1.0) -> GreenGeometry:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d2 = np.sum((x - y) ** 2, axis=-1)
    nx2 = np.sum(x * x, axis=-1)
    ny2 = np.sum(y * y, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = (1.0 - nx2) * (1.0 - ny2) / d2
        psi_R = (r * r - nx2) * (r * r - ny2) / (r * r * d2)
        psi_inf = 4.0 * x[..., 0] * y[..., 0] / d2
    return GreenGeometry(psi, psi_R, psi_inf)


def _psi_integral(order: FracOrder, psi: np.ndarray) -> np.ndarray:
    """``int_0^psi t^(s-1) (1+t)^(-N/2) dt`` through u = t/(1+t)."""
    s, N = order.s, order.N
    psi = np.clip(psi, 0.0, None)
    u = np.where(np.isfinite(psi), psi / (1.0 + psi), 1.0)
    return np.asarray(inc_beta(u, s, N / 2.0 - s))


def green_ball(order: FracOrder, x, y, r: float = 1.0):
    """Green function of the ball B_r with zero exterior data."""
    N, s = order.N, order.s
    order.require_transient("green_ball")
    if r <= 0:
        raise DomainError("green_ball: radius must be positive")
    x, y = _pts(x, N), _pts(y, N)
    d = np.sqrt(np.sum((x - y) ** 2, axis=-1))
    nx2 = np.sum(x * x, axis=-1)
    ny2 = np.sum(y * y, axis=-1)
    inside = (nx2 < r * r) & (ny2 < r * r)
    same = d == 0.0
    kap = constants_for(order).kappa_ns
    safe_d = np.where(same | ~inside, 1.0, d)
    if order.is_log_case:
        xs, ys = x[..., 0], y[..., 0]
        num = r * r - xs * ys + np.sqrt(np.clip(r * r - nx2, 0, None) * np.clip(r * r - ny2, 0, None))
        val = np.log(np.where(inside & ~same, num, 1.0) / (r * safe_d)) / math.pi
    else:
        psi_R = np.clip(r * r - nx2, 0, None) * np.clip(r * r - ny2, 0, None) / (r * r * safe_d**2)
        val = 0.5 * kap * safe_d ** (2 * s - N) * _psi_integral(order, psi_R)
    val = np.where(inside, val, 0.0)
    return _finish(val, inside & same, "green_ball: x == y")


def green_halfspace(order: FracOrder, x, y):
    """Green function of the half space {x_1 > 0}."""
    N, s = order.N, order.s
    order.require_transient("green_halfspace")
    x, y = _pts(x, N), _pts(y, N)
    d = np.sqrt(np.sum((x - y) ** 2, axis=-1))
    inside = (x[..., 0] > 0) & (y[..., 0] > 0)
    same = d == 0.0
    safe_d = np.where(same | ~inside, 1.0, d)
    if order.is_log_case:
        # r -> infinity limit of the interval formula
        rx, ry = np.sqrt(np.clip(x[..., 0], 0, None)), np.sqrt(np.clip(y[..., 0], 0, None))
        gap = np.where(same | ~inside, 1.0, np.abs(rx - ry))
        val = np.log((rx + ry) / gap) / math.pi
    else:
        psi = 4.0 * np.clip(x[..., 0], 0, None) * np.clip(y[..., 0], 0, None) / safe_d**2
        kap = constants_for(order).kappa_ns
        val = 0.5 * kap * safe_d ** (2 * s - N) * _psi_integral(order, psi)
    val = np.where(inside, val, 0.0)
    return _finish(val, inside & same, "green_halfspace: x == y")


def poisson_ball(order: FracOrder, x, y, r: float = 1.0, norm_mode=NormMode.PROBABILISTIC):
    """Poisson kernel of B_r: density of the exterior datum at y seen from x."""
    N, s = order.N, order.s
    x, y = _pts(x, N), _pts(y, N)
    nx2 = np.sum(x * x, axis=-1)
    ny2 = np.sum(y * y, axis=-1)
    d2 = np.sum((x - y) ** 2, axis=-1)
    active = (nx2 < r * r) & (ny2 > r * r)
    on_sphere = (nx2 < r * r) & (ny2 == r * r)
    ratio = np.where(active, (r * r - nx2) / np.where(active, ny2 - r * r, 1.0), 0.0)
    val = poisson_prefactor(order, norm_mode) * ratio**s * np.where(active, d2, 1.0) ** (-N / 2.0)
    val = np.where(active, val, 0.0)
    return _finish(val, on_sphere, "poisson_ball: |y| == r")


def poisson_halfspace(order: FracOrder, x, y, norm_mode=NormMode.PROBABILISTIC):
    """Poisson kernel of the half space, ``pref (x_1/(-y_1))^s |x-y|^(-N)``."""
    N, s = order.N, order.s
    x, y = _pts(x, N), _pts(y, N)
    if np.any(y[..., 0] >= 0):
        raise DomainError("poisson_halfspace: y must satisfy y_1 < 0")
    x1 = np.clip(x[..., 0], 0, None)
    d2 = np.sum((x - y) ** 2, axis=-1)
    val = poisson_prefactor(order, norm_mode) * (x1 / -y[..., 0]) ** s * d2 ** (-N / 2.0)
    val = np.where(x[..., 0] > 0, val, 0.0)
    return float(val) if val.ndim == 0 else val


def fundamental_ps(order: FracOrder, x, prefactor: float | None = None):
    """``P_s(x) = K_s |x|^(-N) x_1^s`` on the half space, 0 elsewhere.

    ``prefactor`` defaults to the printed K_s.
    """
    N, s = order.N, order.s
    order.require_transient("fundamental_ps")
    x = _pts(x, N)
    K = constants_for(order).K_s_paper if prefactor is None else prefactor
    n2 = np.sum(x * x, axis=-1)
    pos = x[..., 0] > 0
    origin = n2 == 0.0
    val = K * np.clip(x[..., 0], 0, None) ** s * np.where(origin, 1.0, n2) ** (-N / 2.0)
    val = np.where(pos, val, 0.0)
    return _finish(val, origin, "fundamental_ps: x == 0")


def boundary_profile(order: FracOrder, x, which: str):
    """``Q_s = x_1^(s-1)`` or ``R_s = (x_1)_+^s`` (zero on the closed left half space)."""
    s = order.s
    x = np.asarray(x, dtype=float)
    x1 = x[..., 0] if x.ndim else x
    if which in ("Q_s", "Q"):
        pos = x1 > 0
        val = np.where(pos, np.where(pos, x1, 1.0) ** (s - 1.0), 0.0)
        return _finish(val, x1 == 0.0, "Q_s: x_1 == 0")
    if which in ("R_s", "R"):
        val = np.clip(x1, 0, None) ** s
        return float(val) if np.ndim(val) == 0 else val
    raise DomainError(f"unknown boundary profile {which!r}")


class MeasureKind(str, enum.Enum):
    DIRAC_AT = "dirac_at"
    LAYER_MU = "layer_mu"
    LAYER_NU = "layer_nu"
    DIRAC_SHIFTED = "dirac_shifted"


@dataclass(frozen=True)
class BoundaryLayerMeasure:
    """Exterior data driving a Poisson superposition.

    * ``dirac_shifted(eps)``: unit Dirac mass at ``-eps e_1``;
    * ``layer_mu(t)``: ``t^s`` times the hyperplane measure on {y_1 = -t};
    * ``layer_nu(t)``: ``t^(1+s)`` times the hyperplane measure on {y_1 = -t};
    * ``dirac_at(p)``: unit Dirac mass at p with p_1 <= 0.  For p_1 = 0 the
      superposition is the renormalized limit, i.e. the fundamental solution
      translated to p.
    """

    kind: MeasureKind
    depth: float = 0.0
    point: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", MeasureKind(self.kind))
        if self.kind is MeasureKind.DIRAC_AT:
            if not self.point or self.point[0] > 0:
                raise DomainError("dirac_at: point must lie in the closed left half space")
        elif not self.depth > 0:
            raise DomainError(f"{self.kind.value}: depth must be positive")

    @classmethod
    def dirac_shifted(cls, eps: float) -> "BoundaryLayerMeasure":
        return cls(MeasureKind.DIRAC_SHIFTED, eps)

    @classmethod
    def layer_mu(cls, t: float) -> "BoundaryLayerMeasure":
        return cls(MeasureKind.LAYER_MU, t)

    @classmethod
    def layer_nu(cls, t: float) -> "BoundaryLayerMeasure":
        return cls(MeasureKind.LAYER_NU, t)

    @classmethod
    def dirac_at(cls, point: Sequence[float]) -> "BoundaryLayerMeasure":
        return cls(MeasureKind.DIRAC_AT, 0.0, tuple(float(v) for v in point))

    def layer_weight(self, s: float) -> float:
        if self.kind is MeasureKind.LAYER_MU:
            return self.depth**s
        if self.kind is MeasureKind.LAYER_NU:
            return self.depth ** (1.0 + s)
        raise DomainError(f"{self.kind.value} is not a planar layer")


def _tan_map_quad(f: Callable[[np.ndarray], float], dim: int, tol: float) -> float:
    """``int_{R^dim} f(y') dy'`` with y'_i = tan(theta_i) on each axis."""
    if dim == 0:
        return f(np.zeros(0))

    def g(*theta):
        th = np.asarray(theta)
        jac = np.prod(1.0 / np.cos(th) ** 2)
        return f(np.tan(th)) * jac

    lim = [(-math.pi / 2, math.pi / 2)] * dim
    val, _ = integrate.nquad(g, lim, opts={"epsabs": 0.0, "epsrel": tol, "limit": 200})
    return val


def poisson_superposition(
    order: FracOrder,
    x,
    mu: BoundaryLayerMeasure,
    norm_mode=NormMode.PROBABILISTIC,
    method: str = "closed",
    tol: float = 1e-10,
) -> float:
    """``P[mu](x) = int P_{s,inf}(x, y) dmu(y)`` for x in the half space.

    ``method="quadrature"`` integrates the kernel over the layer in polar
    coordinates about x' instead of using the closed form.
    """
    N, s = order.N, order.s
    order.require_transient("poisson_superposition")
    x = _pts(x, N).reshape(N)
    if not x[0] > 0:
        raise DomainError("poisson_superposition: x must lie in the half space")
    pref = poisson_prefactor(order, norm_mode)
    if mu.kind is MeasureKind.DIRAC_SHIFTED:
        y = np.zeros(N)
        y[0] = -mu.depth
        return float(poisson_halfspace(order, x, y, norm_mode))
    if mu.kind is MeasureKind.DIRAC_AT:
        p = np.asarray(mu.point, dtype=float)
        if p.shape != (N,):
            raise DomainError("dirac_at: point dimension mismatch")
        if p[0] == 0.0:
            return float(fundamental_ps(order, x - p, prefactor=pref))
        return float(poisson_halfspace(order, x, p, norm_mode))
    t = mu.depth
    weight = mu.layer_weight(s)
    if method == "closed":
        C1, _ = boundary_layer_constants(order, pref)
        base = C1 * x[0] ** s / (x[0] + t)
        return base if mu.kind is MeasureKind.LAYER_MU else base * t
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")
    if N == 1:
        return weight * float(poisson_halfspace(order, x, [-t], norm_mode))
    # the kernel depends on y' only through rho = |y' - x'|
    d = x[0] + t

    def radial(rho):
        y = x.copy()
        y[0] = -t
        y[1] += rho
        return float(poisson_halfspace(order, x, y, norm_mode)) * rho ** (N - 2)

    opts = dict(epsabs=0.0, epsrel=tol, limit=400)
    val = integrate.quad(radial, 0.0, d, **opts)[0] + integrate.quad(radial, d, math.inf, **opts)[0]
    return weight * sphere_measure(N - 1) * val


def halfspace_poisson_integral(
    order: FracOrder,
    x,
    g: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]] | None = None,
    norm_mode=NormMode.PROBABILISTIC,
    tol: float = 1e-9,
) -> float:
    """``int_{y_1<0} P_{s,inf}(x, y) g(y) dy`` for exterior data with a density.

    ``bounds`` restricts the integration box (use it when g has bounded
    support); otherwise y_1 = -tan(theta) and y'_i = tan(theta_i) maps are used.
    """
    N = order.N
    x = _pts(x, N).reshape(N)

    def kern(y):
        return float(poisson_halfspace(order, x, y, norm_mode)) * g(y)

    opts = {"epsabs": 0.0, "epsrel": tol, "limit": 200}
    if bounds is not None:
        if len(bounds) != N or bounds[0][1] > 0:
            raise DomainError("bounds must cover N axes inside y_1 <= 0")
        val, _ = integrate.nquad(lambda *y: kern(np.asarray(y)), list(bounds), opts=opts)
        return val

    def mapped(*theta):
        th = np.asarray(theta)
        y = np.tan(th)
        y[0] = -np.tan(th[0])
        jac = np.prod(1.0 / np.cos(th) ** 2)
        return kern(y) * jac

    lim = [(0.0, math.pi / 2)] + [(-math.pi / 2, math.pi / 2)] * (N - 1)
    val, _ = integrate.nquad(mapped, lim, opts=opts)
    return val


@dataclass(frozen=True)
class SourceDensity:
    evaluator: Callable
    description: str

    def __call__(self, x):
        return self.evaluator(x)


def source_density(order: FracOrder, mu: BoundaryLayerMeasure, method: str = "closed") -> SourceDensity:
    """``Gamma_mu(x) = c_{N,s} int |x - y|^(-N-2s) dmu(y)`` on the half space.

    For planar layers the closed form is ``C2 w(t) (x_1 + t)^(-1-2s)`` with
    ``w(t)`` the layer weight.
    """
    N, s = order.N, order.s
    order.require_transient("source_density")
    consts = constants_for(order)
    c = consts.c_ns
    if mu.kind is MeasureKind.DIRAC_SHIFTED:
        eps = mu.depth

        def gamma_eps(x):
            x = _pts(x, N)
            shifted = x.copy()
            shifted[..., 0] += eps
            out = c * np.sum(shifted**2, axis=-1) ** (-(N + 2 * s) / 2.0)
            return float(out) if out.ndim == 0 else out

        return SourceDensity(gamma_eps, f"Gamma_eps(eps={eps})")
    if mu.kind is MeasureKind.DIRAC_AT:
        p = np.asarray(mu.point, dtype=float)

        def gamma_pt(x):
            out = c * np.sum((_pts(x, N) - p) ** 2, axis=-1) ** (-(N + 2 * s) / 2.0)
            return float(out) if out.ndim == 0 else out

        return SourceDensity(gamma_pt, f"Gamma_mu(dirac_at={tuple(p)})")
    t = mu.depth
    weight = mu.layer_weight(s)
    label = f"Gamma_mu({mu.kind.value}, t={t})"
    if method == "closed":
        C2 = c * planar_moment(N - 1, -(N + 2 * s) / 2.0)

        def gamma_layer(x):
            x = _pts(x, N)
            out = C2 * weight * (x[..., 0] + t) ** (-1.0 - 2 * s)
            return float(out) if out.ndim == 0 else out

        return SourceDensity(gamma_layer, label)

    def gamma_quad(x):
        x = _pts(x, N).reshape(N)

        def integrand(yp):
            return c * ((x[0] + t) ** 2 + float(np.sum(yp**2))) ** (-(N + 2 * s) / 2.0)

        return weight * _tan_map_quad(integrand, N - 1, 1e-11)

    return SourceDensity(gamma_quad, label + " [quadrature]")


def ball_solution(order: FracOrder, x, t: float, r: float, norm_mode=NormMode.PAPER_K):
    """Exterior-Dirac solution in the ball B_r(r e_1) with the mass at -t e_1.

    ``P_{s,r}(x - r e_1, -(t + r) e_1)``, written as
    ``pref ((2 r x_1 - |x|^2)/(2 t r + t^2))^s |x + t e_1|^(-N)``.
    """
    N, s = order.N, order.s
    x = _pts(x, N)
    num = 2.0 * r * x[..., 0] - np.sum(x * x, axis=-1)
    shifted = x.copy()
    shifted[..., 0] += t
    val = poisson_prefactor(order, norm_mode) * (np.clip(num, 0, None) / (2 * t * r + t * t)) ** s
    val = val * np.sum(shifted**2, axis=-1) ** (-N / 2.0)
    val = np.where(num > 0, val, 0.0)
    return float(val) if val.ndim == 0 else val



def _gl(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    u, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * u + 0.5 * (a + b), 0.5 * (b - a) * w


def _graded_unit(n: int, panels: int = 8) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0.0, 1.0, panels + 1) ** 2
    vs, ws = zip(*(_gl(n, a, b) for a, b in zip(edges[:-1], edges[1:])))
    return np.concatenate(vs), np.concatenate(ws)


def _flat_radial_rule(base: float, s: float, tail_power: float, n: int, gap: float = 0.0, panels: int = 8):
    """Nodes and weights on (base + gap, inf) for integrands ~ (rho - base)^{-s}
    near ``base`` and ~ rho^{-1-tail_power} at infinity.

    (base + gap, 2 base): rho = base (1 + v^{1/(1-s)}) with v from
    (gap/base)^{1-s}; (2 base, inf): rho = 2 base w^{-1/tail_power}.  Both
    maps make the model integrand constant.
    """
    q = 1.0 / (1.0 - s)
    v, wv = _graded_unit(n, panels)
    v0 = (gap / base) ** (1.0 - s)
    u, wu = v0 + (1.0 - v0) * v, (1.0 - v0) * wv
    rho_near = base * (1.0 + u**q)
    w_near = wu * base * q * u ** (q - 1.0)
    rho_far = 2.0 * base * v ** (-1.0 / tail_power)
    w_far = wv * 2.0 * base / tail_power * v ** (-1.0 / tail_power - 1.0)
    return np.concatenate([rho_near, rho_far]), np.concatenate([w_near, w_far])


def poisson_mass(order: FracOrder, x, domain: str = "ball", r: float = 1.0,
                 norm_mode=NormMode.PROBABILISTIC, n: int = 48) -> float:
    """Total mass of the Poisson kernel seen from x, by direct quadrature of
    the kernel (N = 1, 2).

    Equals 1 with the probabilistic prefactor and ``2^{2s-1}/s`` with the
    printed one.
    """
    N, s = order.N, order.s
    if N > 2:
        raise DomainError("poisson_mass: implemented for N = 1, 2")
    x = _pts(x, N).reshape(N)
    if domain == "ball":
        a = float(np.linalg.norm(x))
        if not a < r:
            raise DomainError("poisson_mass: x must lie inside the ball")
        # rho - r below ~1e-16 r is not representable: the last sliver
        # (r, r + gap) is added from the (rho - r)^{-s} model
        gap = 1e-9 * r
        rho, w = _flat_radial_rule(r, s, 2.0 * s, n, gap)
        rho = np.append(rho, r + gap)
        w = np.append(w, gap / (1.0 - s))
        if N == 1:
            dirs = np.array([[1.0], [-1.0]])
            wd = np.array([1.0, 1.0])
        else:
            # periodic trapezoid; the angular peak has width ~ r - |x|
            m = max(4 * n, int(math.ceil(64.0 * r / (r - a))))
            th = 2.0 * math.pi * np.arange(m) / m
            dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
            wd = np.full(th.size, 2.0 * math.pi / th.size)
        pts = rho[:, None, None] * dirs[None, :, :]
        k = np.asarray(poisson_ball(order, np.broadcast_to(x, pts.shape), pts, r, norm_mode), dtype=float)
        return float(np.sum(w * rho ** (N - 1) * (k @ wd)))
    if domain != "halfspace":
        raise DomainError(f"unknown domain {domain!r}")
    if not x[0] > 0:
        raise DomainError("poisson_mass: x must lie in the half space")
    # y_1 = -t, t^{-s} at 0 and t^{-1-s} at infinity after the y' integral
    v, wv = _graded_unit(n)
    q = 1.0 / (1.0 - s)
    t_near, w_near = x[0] * v**q, wv * x[0] * q * v ** (q - 1.0)
    t_far, w_far = x[0] * v ** (-1.0 / s), wv * x[0] / s * v ** (-1.0 / s - 1.0)
    t_all, w_all = np.concatenate([t_near, t_far]), np.concatenate([w_near, w_far])
    if N == 1:
        y = -t_all[:, None]
        k = np.asarray(poisson_halfspace(order, np.broadcast_to(x, y.shape), y, norm_mode), dtype=float)
        return float(np.sum(w_all * k))
    phi, wphi = _gl(2 * n, -math.pi / 2, math.pi / 2)
    scale = x[0] + t_all
    y2 = x[1] + scale[:, None] * np.tan(phi)[None, :]
    y = np.stack([np.broadcast_to(-t_all[:, None], y2.shape), y2], axis=-1)
    k = np.asarray(poisson_halfspace(order, np.broadcast_to(x, y.shape), y, norm_mode), dtype=float)
    jac = scale[:, None] / np.cos(phi)[None, :] ** 2
    return float(np.sum(w_all[:, None] * wphi[None, :] * k * jac))
