"""Walk on spheres for the 2s-stable process in the half space.

From the centre of a ball of radius r the process leaves the ball in one jump
with density ``kappa (r^2/(|y|^2-r^2))^s |y|^{-N}``.  Writing ``w = r^2/|y|^2``
this density factors into a uniform direction and ``w ~ Beta(s, 1-s)``, so
the jump is sampled exactly as ``|y| = r w^{-1/2}``.  In the half space the
walk uses the largest ball, radius ``x_1``, until it lands in {y_1 <= 0}.

Random numbers come from Philox streams keyed by ``(seed, block)`` for
fixed-size blocks of walks, so results do not depend on how blocks are
distributed over workers.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .kernels import NormMode, halfspace_poisson_integral
from .special import FracOrder, beta_fn, inc_beta

BLOCK = 4096


@dataclass(frozen=True)
class WalkConfig:
    n_walks: int = 100_000
    max_steps: int = 10_000
    seed: int = 0
    norm_check: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.n_walks <= 0 or self.max_steps <= 0:
            raise DomainError("n_walks and max_steps must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.workers <= 0:
            raise DomainError("workers must be positive")


@dataclass(frozen=True)
class WalkStats:
    estimate: float
    std_error: float
    mean_steps: float
    capped_fraction: float
    n_walks: int
    bias_warning: bool
    reference: float | None = None
    z_score: float | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ExteriorData:
    """Bounded exterior datum g on {y_1 <= 0}.

    ``bounds`` (a box inside {y_1 <= 0} containing the support) lets the
    reference quadrature integrate over a finite region.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "g"
    bounds: tuple[tuple[float, float], ...] | None = None
    constant: float | None = None

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(y, dtype=float)), dtype=float)

    @classmethod
    def const(cls, value: float = 1.0) -> "ExteriorData":
        return cls(lambda y: np.full(y.shape[:-1], float(value)), f"const({value})", constant=float(value))

    @classmethod
    def box_indicator(cls, lo: Sequence[float], hi: Sequence[float]) -> "ExteriorData":
        lo_a, hi_a = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        if hi_a[0] > 0:
            raise DomainError("box must lie in {y_1 <= 0}")

        def fn(y):
            return np.all((y >= lo_a) & (y <= hi_a), axis=-1).astype(float)

        return cls(fn, f"box{tuple(lo_a)}-{tuple(hi_a)}", tuple(zip(lo_a.tolist(), hi_a.tolist())))

    def dilated(self, lam: float) -> "ExteriorData":
        """``g(y / lam)``."""
        f = self.fn
        b = None if self.bounds is None else tuple((lam * a, lam * c) for a, c in self.bounds)
        return ExteriorData(lambda y: f(np.asarray(y) / lam), f"{self.name}(./{lam})", b, self.constant)


def _rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, block]))


def _directions(rng: np.random.Generator, n: int, N: int) -> np.ndarray:
    if N == 1:
        return np.where(rng.random(n) < 0.5, -1.0, 1.0)[:, None]
    z = rng.standard_normal(size=(n, N))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_ball_jump(order: FracOrder, r: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Exit point(s) from the ball B_r centred at the origin."""
    if not r > 0:
        raise DomainError("ball radius must be positive")
    n = 1 if size is None else int(size)
    w = rng.beta(order.s, 1.0 - order.s, size=n)
    rho = r / np.sqrt(w)
    out = rho[:, None] * _directions(rng, n, order.N)
    return out[0] if size is None else out


def jump_tail_probability(order: FracOrder, k: float) -> float:
    """``P(|Y| > k r)`` for the ball exit, ``I_{1/k^2}(s, 1-s)``."""
    if not k >= 1:
        raise DomainError("k must be at least 1")
    s = order.s
    return float(inc_beta(1.0 / (k * k), s, 1.0 - s)) / beta_fn(s, 1.0 - s)


def _run_block(order: FracOrder, x: np.ndarray, g: ExteriorData, cfg: WalkConfig, block: int, n: int):
    rng = _rng(cfg.seed, block)
    N, s = order.N, order.s
    pos = np.tile(x, (n, 1))
    value = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    for _ in range(cfg.max_steps):
        if active.size == 0:
            break
        p = pos[active]
        w = rng.beta(s, 1.0 - s, size=active.size)
        jump = (p[:, 0] / np.sqrt(w))[:, None] * _directions(rng, active.size, N)
        p = p + jump
        pos[active] = p
        steps[active] += 1
        out = p[:, 0] <= 0.0
        if np.any(out):
            idx = active[out]
            value[idx] = g(p[out])
        active = active[~out]
    capped = active.size
    return value, steps, capped


def wos_estimate(order: FracOrder, x, g: ExteriorData | Callable, config: WalkConfig | None = None) -> WalkStats:
    """Monte Carlo value at x of the s-harmonic extension of g.

    Walks still inside after ``max_steps`` contribute 0; a capped fraction
    above 1% sets ``bias_warning``.  With ``norm_check`` the quadrature of the
    half-space Poisson kernel against g is reported with the z-score.
    """
    cfg = config or WalkConfig()
    if not isinstance(g, ExteriorData):
        g = ExteriorData(g)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (order.N,):
        raise DomainError("point dimension does not match N")
    if not x[0] > 0:
        raise DomainError("walks start in the half space x_1 > 0")
    sizes = [min(BLOCK, cfg.n_walks - b * BLOCK) for b in range(math.ceil(cfg.n_walks / BLOCK))]

    def job(b):
        return _run_block(order, x, g, cfg, b, sizes[b])

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    # reduction in block order
    values = np.concatenate([p[0] for p in parts])
    steps = np.concatenate([p[1] for p in parts])
    capped = sum(p[2] for p in parts)
    n = values.size
    est = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    frac = capped / n
    warn = frac > 0.01
    if warn:
        warnings.warn(f"walk on spheres: {frac:.2%} of walks hit max_steps", RuntimeWarning, stacklevel=2)
    ref = z = None
    if cfg.norm_check:
        ref = reference_value(order, x, g)
        if ref is not None:
            z = (est - ref) / se if se > 0 else (0.0 if est == ref else math.inf)
    return WalkStats(est, se, float(np.mean(steps)), frac, n, warn, ref, z)


def reference_value(order: FracOrder, x, g: ExteriorData, tol: float = 1e-9) -> float | None:
    """``int_{y_1<0} P(x, y) g(y) dy`` with the unit-mass kernel."""
    if g.constant is not None:
        return g.constant
    return halfspace_poisson_integral(order, x, g.fn, bounds=g.bounds, norm_mode=NormMode.PROBABILISTIC, tol=tol)
