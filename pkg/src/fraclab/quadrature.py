"""Panel quadrature on intervals and circles, graded toward singular points,
and antipodally symmetric rules on S^{N-1} for N = 1, 2, 3."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as _sp


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def graded_edges(
    a: float,
    b: float,
    singular=(),
    levels: int = 12,
    ratio: float = 0.2,
    max_width: float = math.inf,
    geometric_from_zero: bool = False,
    per_octave: int = 2,
    fixed: tuple[float, ...] = (),
) -> tuple[np.ndarray, dict[float, float]]:
    """Panel edges on [a, b] and the singular points that ended up as edges.

    ``singular`` is a sequence of positions or of ``(position, exponent)``
    pairs, optionally ``(position, exponent, levels)`` to override the depth.
    Panels are refined geometrically (``levels`` layers, width ``ratio``)
    toward every singular point inside [a, b].  ``fixed`` points only
    become edges.  With ``geometric_from_zero`` the edges also follow a
    geometric progression, ``per_octave`` panels per doubling.
    """
    sing: dict[float, float] = {}
    depth: dict[float, int] = {}
    for item in singular:
        pos, ex = (item, 0.0) if np.isscalar(item) else (float(item[0]), float(item[1]))
        lv = levels if np.isscalar(item) or len(item) < 3 else int(item[2])
        if a <= pos <= b:
            sing[float(pos)] = min(ex, sing.get(float(pos), ex))
            depth[float(pos)] = max(lv, depth.get(float(pos), lv))
    cuts = {a, b}
    cuts.update(sing)
    cuts.update(p for p in fixed if a < p < b)
    if geometric_from_zero and a > 0:
        q = 2.0 ** (1.0 / per_octave)
        k0 = math.floor(math.log(a, q)) + 1
        k1 = math.ceil(math.log(b, q))
        cuts.update(q**k for k in range(k0, k1) if a < q**k < b)
    # merge cuts that coincide up to rounding, keeping the singular one
    edges: list[float] = []
    for e in sorted(cuts):
        if edges and e - edges[-1] <= 1e-13 * abs(e):
            if e in sing or e == b:
                edges[-1] = e
            continue
        edges.append(e)
    out = [edges[0]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        width = hi - lo
        pts = [lo, hi]
        left, right = lo in sing, hi in sing
        if left or right:
            span = width / 2.0 if (left and right) else width
            d = span
            for _ in range(max(depth.get(lo, 0) if left else 0, depth.get(hi, 0) if right else 0)):
                d *= ratio
                if left:
                    pts.append(lo + d)
                if right:
                    pts.append(hi - d)
            if left and right:
                pts.append(lo + width / 2.0)
        pts = sorted(set(pts))
        for p0, p1 in zip(pts[:-1], pts[1:]):
            m = max(1, math.ceil((p1 - p0) / max_width)) if math.isfinite(max_width) else 1
            for j in range(1, m + 1):
                out.append(p0 + (p1 - p0) * j / m)
    return np.asarray(out), sing


@lru_cache(maxsize=256)
def _jacobi(n: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    # nodes/weights for int_{-1}^{1} f(x) dx when f ~ (1+x)^beta near -1
    x, w = _sp.roots_jacobi(n, 0.0, beta)
    w = w * (1.0 + x) ** (-beta)
    return x, w


def singular_panel_rule(
    edges: np.ndarray, order: int, sing: dict[float, float]
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre, with Gauss-Jacobi on panels that touch a
    singular edge of nonzero exponent."""
    nodes, weights = panel_rule(edges, order)
    if not sing:
        return nodes, weights
    for i in range(len(edges) - 1):
        lo, hi = float(edges[i]), float(edges[i + 1])
        half = 0.5 * (hi - lo)
        if half <= 0:
            continue
        for end, sign in ((lo, 1.0), (hi, -1.0)):
            beta = sing.get(end)
            if beta is None or beta == 0.0:
                continue
            x, w = _jacobi(order, max(beta, -0.999))
            nodes[i] = 0.5 * (lo + hi) + sign * half * x if sign > 0 else 0.5 * (lo + hi) - half * x
            weights[i] = half * w
            if sign < 0:
                nodes[i] = nodes[i][::-1]
                weights[i] = weights[i][::-1]
            break
    return nodes, weights


def panel_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over consecutive ``edges``."""
    x, w = gauss_legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes, weights


def symmetric_half_rule(N: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Half of an antipodally symmetric rule on S^{N-1}.

    Returns directions ``H`` and weights such that the full rule is
    ``H`` together with ``-H`` carrying the same weights.  ``n`` is the number
    of circle points for N = 2 (rounded up to even) and the number of
    Gauss-Legendre nodes in the polar cosine for N = 3 (also even, so no node
    sits on the equator).
    """
    if N == 1:
        return np.ones((1, 1)), np.ones(1)
    if N == 2:
        n = max(2, n + (n % 2))
        th = 2.0 * math.pi * (np.arange(n // 2) + 0.5) / n
        return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(n // 2, 2.0 * math.pi / n)
    if N == 3:
        n = max(2, n + (n % 2))
        t, wt = gauss_legendre(n)
        keep = t > 0
        t, wt = t[keep], wt[keep]
        nphi = 2 * n
        phi = 2.0 * math.pi * np.arange(nphi) / nphi
        T, P = np.meshgrid(t, phi, indexing="ij")
        rho = np.sqrt(1.0 - T**2)
        dirs = np.stack([T, rho * np.cos(P), rho * np.sin(P)], axis=-1).reshape(-1, 3)
        w = (wt[:, None] * np.full(nphi, 2.0 * math.pi / nphi)[None, :]).reshape(-1)
        return dirs, w
    raise NotImplementedError(f"sphere rules are implemented for N <= 3, got N={N}")


def circle_graded_rule(breaks, n_min: int, order: int, levels: int, ratio: float) -> tuple[np.ndarray, np.ndarray]:
    """Angles and weights on [0, 2 pi) graded toward ``breaks``.

    ``breaks`` holds angles or ``(angle, exponent)`` pairs.
    """
    if not breaks:
        th = 2.0 * math.pi * np.arange(n_min) / n_min
        return th, np.full(n_min, 2.0 * math.pi / n_min)
    two_pi = 2.0 * math.pi
    items = [(b, 0.0, levels) if np.isscalar(b) else (float(b[0]), float(b[1]), int(b[2]) if len(b) > 2 else levels) for b in breaks]
    items = [(v % two_pi, e, lv) for v, e, lv in items]
    start = min(v for v, _, _ in items)
    rel = [(v - start, e, lv) for v, e, lv in items]
    e0, l0 = min((e, lv) for v, e, lv in rel if v == 0.0)
    rel.append((two_pi, e0, l0))
    max_w = two_pi * order / max(n_min, order)
    edges, sing = graded_edges(0.0, two_pi, rel, levels, ratio, max_width=max_w)
    nodes, weights = singular_panel_rule(edges, order, sing)
    return nodes.ravel() + start, weights.ravel()


def interval_graded_rule(
    a: float, b: float, breaks, n_min: int, order: int, levels: int, ratio: float
) -> tuple[np.ndarray, np.ndarray]:
    max_w = (b - a) * order / max(n_min, order)
    edges, sing = graded_edges(a, b, breaks, levels, ratio, max_width=max_w)
    nodes, weights = singular_panel_rule(edges, order, sing)
    return nodes.ravel(), weights.ravel()
