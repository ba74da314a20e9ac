"""Numerical toolkit for the fractional Laplacian on the half space.

Modules: ``special`` (constants and special functions), ``kernels`` (Green
and Poisson kernels), ``pvlap`` (principal-value evaluation), ``harmonics``
(harmonic polynomials and annulus identities), ``identities`` (weak
identities), ``limits`` (convergence studies), ``wos`` (walk on spheres) and
``cli``.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import DivergenceError, DomainError, FraclabError, SingularValue
from .special import Constants, FracOrder, c_ns, constants_for, kappa_ns

__all__ = [
    "__version__",
    "Constants",
    "DivergenceError",
    "DomainError",
    "FracOrder",
    "FraclabError",
    "SingularValue",
    "c_ns",
    "constants_for",
    "kappa_ns",
]
