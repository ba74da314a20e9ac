"""Special functions and the normalization constants of the fractional Laplacian.

Sphere convention: ``omega_M`` is the surface measure of the unit sphere
S^{M-1} in R^M, i.e. ``2 pi^{M/2} / Gamma(M/2)``.  Every other module
goes through :func:`sphere_measure`, so this is the only place where the
convention is fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import DivergenceError, DomainError

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_pole(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _lanczos_sum(z: float) -> float:
    # z is the shifted argument x - 1
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    return acc


def gamma_fn(x: float) -> float:
    """Gamma function for real ``x`` away from the poles 0, -1, -2, ...

    Lanczos approximation for ``x >= 1/2`` and the reflection formula below.
    Relative accuracy is about 1e-15 on [0.05, 50].
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if _is_pole(x):
        raise DomainError(f"gamma_fn: pole at x={x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    if x > 171.7:
        return math.inf
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    if x < 140.0:
        return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * _lanczos_sum(z)
    return math.exp(log_gamma(x))


def log_gamma(x: float) -> float:
    """Natural log of ``|Gamma(x)|``."""
    x = float(x)
    if _is_pole(x):
        raise DomainError(f"log_gamma: pole at x={x}")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - log_gamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def beta_fn(a: float, b: float) -> float:
    """Complete Beta function B(a, b) for a, b > 0."""
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_fn requires a, b > 0, got ({a}, {b})")
    if a + b < 140.0:
        return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b)
    return math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))


def _inc_beta_b0(x: float, a: float) -> float:
    # B_x(a, 0) = int_0^x u^(a-1) / (1-u) du, x < 1
    if x <= 0.5:
        total, n, term = 0.0, 0, 1.0
        xa = x**a
        while True:
            term = xa * x**n / (a + n)
            total += term
            n += 1
            if term < 1e-17 * total or n > 400:
                return total
    # -log(1-x) + int_0^x h,  h(u) = (u^(a-1) - 1) / (1 - u),  int_0^1 h = -digamma(a) - euler_gamma
    nodes, weights = np.polynomial.legendre.leggauss(40)
    u = 0.5 * (1.0 - x) * nodes + 0.5 * (1.0 + x)
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.where(np.abs(1.0 - u) > 1e-12, (u ** (a - 1.0) - 1.0) / (1.0 - u), 1.0 - a)
    tail = 0.5 * (1.0 - x) * float(np.dot(weights, h))
    return -math.log1p(-x) - float(_sp.digamma(a)) - np.euler_gamma - tail


def _inc_beta_scalar(x: float, a: float, b: float) -> float:
    if x == 0.0:
        return 0.0
    if b > 0:
        return float(_sp.betainc(a, b, x)) * beta_fn(a, b)
    if x >= 1.0:
        raise DivergenceError(f"inc_beta: divergent tail for b={b} <= 0 at x=1")
    # lift b to (0, 1] (or to 0 for integers) and recur down:
    #   B_x(a, b) = [(a + b) B_x(a, b + 1) - x^a (1 - x)^b] / b
    k = math.ceil(-b) if b != math.floor(b) else -int(b)
    b_top = b + k
    val = _inc_beta_b0(x, a) if b_top == 0 else float(_sp.betainc(a, b_top, x)) * beta_fn(a, b_top)
    xa = x**a
    for i in range(k):
        bb = b_top - 1 - i
        val = ((a + bb) * val - xa * (1.0 - x) ** bb) / bb
    return val


def inc_beta(x, a: float, b: float):
    """Unnormalized incomplete Beta integral ``int_0^x u^(a-1) (1-u)^(b-1) du``.

    ``b <= 0`` is allowed for ``x < 1``.  ``x`` may be an array.
    """
    if not a > 0:
        raise DomainError(f"inc_beta requires a > 0, got {a}")
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise DomainError("inc_beta: x must lie in [0, 1]")
    if b > 0:
        out = _sp.betainc(a, b, arr) * beta_fn(a, b)
        return float(out) if out.ndim == 0 else out
    if np.any(arr >= 1.0):
        raise DivergenceError(f"inc_beta: divergent tail for b={b} <= 0 at x=1")
    if arr.ndim == 0:
        return _inc_beta_scalar(float(arr), a, b)
    flat = np.array([_inc_beta_scalar(float(v), a, b) for v in arr.ravel()])
    return flat.reshape(arr.shape)


def sphere_measure(M: int) -> float:
    """Surface measure of the unit sphere S^{M-1} in R^M."""
    if M < 1:
        raise DomainError(f"sphere_measure requires M >= 1, got {M}")
    return 2.0 * math.pi ** (M / 2.0) / gamma_fn(M / 2.0)


def planar_moment(M: int, tau: float) -> float:
    """``int_{R^M} (1 + |z|^2)^tau dz = (omega_M / 2) B(M/2, -tau - M/2)``.

    ``M = 0`` is accepted and returns 1 (integral over a single point).
    """
    if M == 0:
        return 1.0
    if M < 0:
        raise DomainError(f"planar_moment requires M >= 0, got {M}")
    if not tau < -M / 2.0:
        raise DivergenceError(f"planar_moment diverges for tau={tau} >= -M/2={-M / 2}")
    return 0.5 * sphere_measure(M) * beta_fn(M / 2.0, -tau - M / 2.0)


@dataclass(frozen=True)
class FracOrder:
    """Dimension ``N`` and fractional order ``s`` with the standing assumption N > 2s.

    ``allow_log`` admits the borderline N = 1 = 2s used by the logarithmic
    Green function; ``allow_classical`` admits s = 1.  ``allow_recurrent``
    admits N <= 2s for operator-level work (the principal value and the
    Fourier multiplier make sense for every s in (0, 1)); kernels that need
    N > 2s reject such orders via :meth:`require_transient`.
    """

    N: int
    s: float
    allow_log: bool = False
    allow_classical: bool = False
    allow_recurrent: bool = False

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"FracOrder: N must be a positive integer, got {self.N}")
        s = self.s
        if not (0.0 < s < 1.0 or (s == 1.0 and self.allow_classical)):
            raise DomainError(f"FracOrder: s must lie in (0, 1), got {s}")
        if not self.N > 2 * s and not self.allow_recurrent:
            if not (self.allow_log and self.N == 1 and s == 0.5):
                raise DomainError(f"FracOrder: need N > 2s, got N={self.N}, s={s}")

    @property
    def is_log_case(self) -> bool:
        return self.N == 1 and self.s == 0.5

    @property
    def transient(self) -> bool:
        return self.N > 2 * self.s

    def require_transient(self, what: str) -> None:
        if not self.transient and not (self.allow_log and self.is_log_case):
            raise DomainError(f"{what}: needs N > 2s, got N={self.N}, s={self.s}")


@dataclass(frozen=True)
class Constants:
    c_ns: float
    kappa_ns: float
    K_s_paper: float
    C_s_paper: float
    C_s_derived: float
    omega_N: float
    # values under which the two weak identities hold with unit weight
    K_s_weak: float
    C_s_weak: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def c_ns(N: int, s: float) -> float:
    return 2.0 ** (2 * s) * math.pi ** (-N / 2.0) * s * gamma_fn((N + 2 * s) / 2.0) / gamma_fn(1.0 - s)


def kappa_ns(N: int, s: float) -> float:
    return math.pi ** (-(N / 2.0 + 1.0)) * gamma_fn(N / 2.0) * math.sin(math.pi * s)


def constants_for(order: FracOrder) -> Constants:
    N, s = order.N, order.s
    c = c_ns(N, s)
    kap = kappa_ns(N, s)
    K = kap * 2.0 ** (2 * s - 1) / s
    gs, gsh = gamma_fn(s), gamma_fn(s + 0.5)
    return Constants(
        c_ns=c,
        kappa_ns=kap,
        K_s_paper=K,
        C_s_paper=2.0 * math.sqrt(math.pi) * s / math.sin(math.pi * s) * gsh / gs,
        C_s_derived=2.0 * s * s * gs * gsh / math.sqrt(math.pi),
        omega_N=sphere_measure(N),
        K_s_weak=gamma_fn(N / 2.0) / (math.pi ** (N / 2.0) * gs * gamma_fn(1.0 + s)),
        C_s_weak=gs * gamma_fn(1.0 + s),
    )


def boundary_layer_constants(order: FracOrder, prefactor: float) -> tuple[float, float]:
    """``(C1, C2)``: the Poisson and source constants of a unit-density planar layer."""
    N, s = order.N, order.s
    C1 = prefactor * planar_moment(N - 1, -N / 2.0)
    C2 = c_ns(N, s) * planar_moment(N - 1, -(N + 2 * s) / 2.0)
    return C1, C2


def _upper_series(y: np.ndarray, a: float, b: float) -> np.ndarray:
    # antiderivative of y^(b-1) (1-y)^(a-1) for 0 < y <= 1/2, termwise in (1-y)^(a-1)
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    coef = 1.0
    ly = np.log(y)
    for k in range(200):
        e = k + b
        term = coef * (ly if e == 0 else np.exp(e * ly) / e)
        out = out + term
        if k > 4 and np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(out), 1e-300)):
            break
        coef *= -(a - 1.0 - k) / (k + 1.0)
    return out


def radial_power_integral(p: float, q: float, lo, hi):
    """``int_lo^hi w^p (1 + w^2)^(-q) dw`` for 0 <= lo <= hi < inf, p > -1.

    Split at w = 1: below, an incomplete Beta in v = w^2/(1+w^2); above, a
    series in y = 1/(1+w^2), so very large upper limits keep full accuracy
    even when the integral grows with ``hi``.
    """
    a = (p + 1.0) / 2.0
    b = q - a
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    below_hi = np.minimum(hi, 1.0)
    below_lo = np.minimum(lo, 1.0)
    v = lambda w: w * w / (1.0 + w * w)
    part1 = 0.5 * (inc_beta(v(below_hi), a, b) - inc_beta(v(below_lo), a, b))
    above_lo = np.maximum(lo, 1.0)
    above_hi = np.maximum(hi, 1.0)
    y = lambda w: 1.0 / (1.0 + w * w)
    part2 = 0.5 * (_upper_series(y(above_lo), a, b) - _upper_series(y(above_hi), a, b))
    out = np.asarray(part1 + part2, dtype=float)
    return float(out) if out.ndim == 0 else out
