"""Exception types and the tagged value returned at kernel singularities."""

from __future__ import annotations

import math


class FraclabError(Exception):
    """Base class for all errors raised by fraclab."""


class DomainError(FraclabError, ValueError):
    """An argument lies outside the domain of an operation."""


class DivergenceError(FraclabError, ArithmeticError):
    """A limit or improper integral does not exist."""


class SingularValue(float):
    """Infinite kernel value at a singular configuration.

    Behaves like ``math.inf`` in arithmetic but keeps the reason, so callers
    can tell a genuine singularity apart from a floating overflow.
    """

    reason: str

    def __new__(cls, reason: str = "singular") -> "SingularValue":
        obj = super().__new__(cls, math.inf)
        obj.reason = reason
        return obj

    def __repr__(self) -> str:
        return f"SingularValue({self.reason!r})"

    def __reduce__(self):
        return (SingularValue, (self.reason,))
