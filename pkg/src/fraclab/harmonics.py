"""Exact polynomial algebra for harmonic polynomials and their fractional Laplacian.

Polynomials carry :class:`fractions.Fraction` coefficients.  The harmonic
space of degree m is computed as the exact nullspace of the Laplacian
P_m -> P_{m-2}.  Spherical moments of monomials are rational multiples of the
sphere measure, so the shift coefficients ``Z_j`` vanish exactly (not up to
rounding) for harmonic input at rational points.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy import integrate

from .errors import DomainError
from .special import FracOrder, c_ns, gamma_fn, sphere_measure

Exponent = tuple[int, ...]


@dataclass(frozen=True)
class MultiIndex:
    exponents: Exponent

    def __post_init__(self):
        if any(int(a) != a or a < 0 for a in self.exponents):
            raise DomainError(f"MultiIndex: exponents must be nonnegative integers, got {self.exponents}")

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def N(self) -> int:
        return len(self.exponents)

    def factorial(self) -> int:
        return math.prod(math.factorial(a) for a in self.exponents)


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial in N variables with exact rational coefficients."""

    N: int
    terms: Mapping[Exponent, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.terms).items():
            k = tuple(int(a) for a in k)
            if len(k) != self.N:
                raise DomainError(f"Polynomial: exponent {k} does not have length N={self.N}")
            v = _frac(v)
            if v != 0:
                clean[k] = clean.get(k, Fraction(0)) + v
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if v != 0})

    # construction

    @classmethod
    def monomial(cls, alpha: Iterable[int], coef=1) -> "Polynomial":
        alpha = tuple(alpha)
        return cls(len(alpha), {alpha: coef})

    @classmethod
    def variable(cls, N: int, i: int) -> "Polynomial":
        e = [0] * N
        e[i] = 1
        return cls.monomial(e)

    @classmethod
    def constant(cls, N: int, c=1) -> "Polynomial":
        return cls(N, {(0,) * N: c})

    @classmethod
    def norm_squared(cls, N: int) -> "Polynomial":
        return sum((cls.variable(N, i) * cls.variable(N, i) for i in range(N)), cls(N))

    # algebra

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.N != self.N:
                raise DomainError("Polynomial: dimension mismatch")
            return other
        return Polynomial.constant(self.N, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Polynomial(self.N, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.N, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for (a, u), (b, v) in itertools.product(self.terms.items(), other.terms.items()):
            k = tuple(x + y for x, y in zip(a, b))
            out[k] = out.get(k, Fraction(0)) + u * v
        return Polynomial(self.N, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise DomainError("Polynomial: only nonnegative integer powers")
        out = Polynomial.constant(self.N)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.N == other.N and self.terms == other.terms

    def __hash__(self):
        return hash((self.N, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, reverse=True):
            mono = "*".join(f"x{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(k) if a)
            parts.append(f"{self.terms[k]}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # structure

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    @property
    def homogeneous_degree(self) -> int | None:
        degs = {sum(k) for k in self.terms}
        if len(degs) > 1:
            return None
        return degs.pop() if degs else 0

    @property
    def is_homogeneous(self) -> bool:
        return self.homogeneous_degree is not None

    def partial(self, i: int, times: int = 1) -> "Polynomial":
        out = {}
        for k, v in self.terms.items():
            if k[i] >= times:
                kk = list(k)
                kk[i] -= times
                out[tuple(kk)] = v * math.perm(k[i], times)
        return Polynomial(self.N, out)

    def laplacian(self) -> "Polynomial":
        return sum((self.partial(i, 2) for i in range(self.N)), Polynomial(self.N))

    # evaluation

    def evaluate(self, pts) -> np.ndarray:
        """Floating-point values at an array of points (trailing axis N)."""
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1])
        for k in sorted(self.terms):
            term = np.full(pts.shape[:-1], float(self.terms[k]))
            for i, a in enumerate(k):
                if a:
                    term = term * pts[..., i] ** a
            out = out + term
        return out

    def evaluate_exact(self, x: Iterable) -> Fraction:
        x = [_frac(v) for v in x]
        return sum(
            (v * math.prod(xi**a for xi, a in zip(x, k)) for k, v in self.terms.items()), Fraction(0)
        )

    def derivative_at(self, beta: Exponent, x) -> Fraction | float:
        """``d^beta p (x)``; exact when x is rational."""
        q = self
        for i, b in enumerate(beta):
            if b:
                q = q.partial(i, b)
        if all(isinstance(v, (int, Fraction)) for v in x):
            return q.evaluate_exact(x)
        return float(q.evaluate(np.asarray(x, dtype=float)[None, :])[0])


# ---------------------------------------------------------------- bases


def monomials(N: int, m: int) -> list[Exponent]:
    """All exponents of total degree m, in reverse lexicographic order."""
    if m < 0:
        return []
    out = []
    for c in itertools.combinations_with_replacement(range(N), m):
        e = [0] * N
        for i in c:
            e[i] += 1
        out.append(tuple(e))
    return sorted(set(out), reverse=True)


def harmonic_dim(N: int, m: int) -> int:
    if N < 2:
        raise DomainError(f"harmonic_dim requires N >= 2, got {N}")
    if m < 0:
        return 0
    full = math.comb(m + N - 1, m)
    return full - math.comb(m + N - 3, m - 2) if m >= 2 else full


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Exact nullspace basis by reduced row echelon form."""
    A = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -A[i][f]
        basis.append(v)
    return basis


def laplacian_matrix(N: int, m: int) -> tuple[list[list[Fraction]], list[Exponent], list[Exponent]]:
    """Matrix of the Laplacian P_m -> P_{m-2} in monomial coordinates."""
    cols = monomials(N, m)
    rows = monomials(N, m - 2)
    index = {e: i for i, e in enumerate(rows)}
    M = [[Fraction(0)] * len(cols) for _ in rows]
    for j, e in enumerate(cols):
        lap = Polynomial.monomial(e).laplacian()
        for k, v in lap.terms.items():
            M[index[k]][j] += v
    return M, rows, cols


def harmonic_basis(N: int, m: int) -> list[Polynomial]:
    """Exact basis of the homogeneous harmonic polynomials of degree m in N variables."""
    if N < 2:
        raise DomainError(f"harmonic_basis requires N >= 2, got {N}")
    cols = monomials(N, m)
    if m < 2:
        return [Polynomial.monomial(e) for e in cols]
    M, _, cols = laplacian_matrix(N, m)
    return [Polynomial(N, dict(zip(cols, v))) for v in _nullspace(M, len(cols))]


def fischer_pairing(P: Polynomial, Q: Polynomial) -> Fraction:
    """``[P, Q] = sum_alpha alpha! b_alpha c_alpha``, i.e. P(d) applied to Q.

    Harmonic polynomials of degree m are exactly the polynomials orthogonal
    under this pairing to ``|x|^2 P_{m-2}``.
    """
    return sum(
        (v * Q.terms.get(k, 0) * MultiIndex(k).factorial() for k, v in P.terms.items()), Fraction(0)
    )


# ---------------------------------------------------------------- spherical moments


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def sphere_mean_exact(alpha: Exponent) -> Fraction:
    """Average of ``w^alpha`` over S^{N-1}, an exact rational."""
    if any(a % 2 for a in alpha):
        return Fraction(0)
    N = len(alpha)
    num = math.prod(_double_factorial(a - 1) for a in alpha)
    den = math.prod(N + 2 * k for k in range(sum(alpha) // 2))
    return Fraction(num, den)


def sphere_moment(alpha) -> float:
    """``int_{S^{N-1}} w^alpha dw = 2 prod Gamma((a_i+1)/2) / Gamma(sum (a_i+1)/2)``."""
    alpha = alpha.exponents if isinstance(alpha, MultiIndex) else tuple(alpha)
    if any(a % 2 for a in alpha):
        return 0.0
    num = math.prod(gamma_fn((a + 1) / 2.0) for a in alpha)
    return 2.0 * num / gamma_fn(sum(a + 1 for a in alpha) / 2.0)


def _shift_means(p: Polynomial, x) -> dict[int, Fraction | float]:
    """``j -> sum_{|beta|=j} d^beta p(x)/beta! * mean_S(w^beta)`` for j >= 1."""
    out: dict[int, Fraction | float] = {}
    for j in range(1, p.degree + 1):
        acc = Fraction(0)
        for beta in monomials(p.N, j):
            mu = sphere_mean_exact(beta)
            if mu == 0:
                continue
            acc += p.derivative_at(beta, x) * mu / MultiIndex(beta).factorial()
        out[j] = acc
    return out


def spherical_average_deficit(p: Polynomial, x, r) -> Fraction | float:
    """``mean_{|z|=r} p(x+z) - p(x)``, exact for rational x and r."""
    means = _shift_means(p, x)
    return sum((m * _frac(r) ** j if isinstance(r, (int, Fraction)) else float(m) * r**j for j, m in means.items()), Fraction(0))


def zj_coefficients(p: Polynomial, x, exact: bool = False) -> dict[int, float | Fraction]:
    """``Z_j(x) = int_{S^{N-1}} [degree-j part in z of p(x+z)] dw`` for j = 2..m.

    With ``exact=True`` the values are returned divided by the sphere measure
    (exact rationals at rational x); otherwise they are floats including it.
    """
    if not p.is_homogeneous:
        raise DomainError("zj_coefficients: polynomial must be homogeneous")
    means = _shift_means(p, x)
    m = p.degree
    if exact:
        return {j: means.get(j, Fraction(0)) for j in range(2, m + 1)}
    S = sphere_measure(p.N)
    return {j: float(means.get(j, 0)) * S for j in range(2, m + 1)}


# ---------------------------------------------------------------- kernels


class KernelFamily(str, enum.Enum):
    FRAC = "frac"
    K1 = "K1"
    K2 = "K2"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RadialKernel:
    """Radial kernel K(t) of a nonlocal operator on R^N.

    ``moment_finite_up_to`` is the largest i for which ``int_1^inf K t^{N-1+i}``
    is finite (None: all moments finite).
    """

    eval: Callable[[np.ndarray], np.ndarray]
    N: int
    family: KernelFamily = KernelFamily.CUSTOM
    param: float = 0.0
    moment_finite_up_to: int | None = None

    @classmethod
    def frac(cls, N: int, s: float) -> "RadialKernel":
        return cls(lambda t: np.asarray(t, dtype=float) ** (-N - 2.0 * s), N, KernelFamily.FRAC, s, math.ceil(2 * s) - 1)

    @classmethod
    def K1(cls, N: int, zeta: float) -> "RadialKernel":
        """Representative of the first class: ``(1+t)^{-N-zeta}``."""
        return cls(lambda t: (1.0 + np.asarray(t, dtype=float)) ** (-N - zeta), N, KernelFamily.K1, zeta, math.ceil(zeta) - 1)

    @classmethod
    def K2(cls, N: int, zeta: float) -> "RadialKernel":
        """Representative of the second class: ``t^{-N-zeta} e^{-t}``."""
        return cls(lambda t: np.asarray(t, dtype=float) ** (-N - zeta) * np.exp(-np.asarray(t, dtype=float)), N, KernelFamily.K2, zeta, None)


def sigma_frac(s: float, j: int, eps: float) -> float:
    """``int_eps^{1/eps} t^{j-1-2s} dt`` in closed form (log branch at j = 2s)."""
    a = j - 2.0 * s
    if a == 0.0:
        return -2.0 * math.log(eps)
    return (eps ** (-a) - eps**a) / a


def sigma(K: RadialKernel, j: int, eps: float) -> float:
    """``int_eps^{1/eps} K(t) t^{N-1+j} dt``."""
    if K.family is KernelFamily.FRAC:
        return sigma_frac(K.param, j, eps)
    N = K.N
    # u = log t; split at the natural scales
    f = lambda u: float(K.eval(math.exp(u))) * math.exp(u * (N + j))
    lo, hi = math.log(eps), -math.log(eps)
    pts = sorted({lo, hi, *(v for v in (-5.0, 0.0, 3.0) if lo < v < hi)})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=400)[0]
    return total


def kappa_ratio(K: RadialKernel, N: int, i: int, j: int, eps: float) -> float:
    """``kappa_{i,j}(eps) = sigma_j(eps) / sigma_i(eps)``."""
    if i < 2 or j < 2:
        raise DomainError("kappa_ratio: indices must be >= 2")
    if K.N != N:
        K = RadialKernel(K.eval, N, K.family, K.param, K.moment_finite_up_to)
    den = sigma(K, i, eps)
    if den == 0.0:
        raise DomainError("kappa_ratio: zero denominator")
    return sigma(K, j, eps) / den


def annulus_frac_lap_poly(order: FracOrder, p: Polynomial, x, eps: float) -> float:
    """``c int_{eps<|z|<1/eps} (p(x) - p(x+z)) |z|^{-N-2s} dz`` in closed form.

    Equal to ``-c sum_j Z_j(x) sigma_j(eps)``; exactly 0.0 when every Z_j
    vanishes (harmonic p at a rational point).
    """
    if p.N != order.N:
        raise DomainError("annulus_frac_lap_poly: dimension mismatch")
    means = _shift_means(p, x)
    live = {j: m for j, m in means.items() if m != 0}
    if not live:
        return 0.0
    S = sphere_measure(p.N)
    total = math.fsum(float(m) * S * sigma_frac(order.s, j, eps) for j, m in live.items())
    return -c_ns(order.N, order.s) * total
