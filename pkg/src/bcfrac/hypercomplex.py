"""Bicomplex and hyperbolic number arithmetic in the idempotent basis.

A bicomplex number is stored as its two idempotent components ``(z1, z2)``,
so that the represented value is ``z1*E + z2*E'`` where ``E`` and ``E'`` are
the two idempotent zero divisors (``E + E' = 1``, ``E*E' = 0``).  Addition
and multiplication act componentwise, which is why every operator here is a
one-liner.  The cartesian form ``a + b*j`` exists only at the conversion
boundary (:func:`bc_from_cartesian` / :func:`bc_to_cartesian`).

Components may be Python complex scalars or numpy complex arrays; all
operations broadcast componentwise either way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ZeroDivisorError, ZeroError

#: Absolute tolerance below which a component counts as zero when classifying
#: zero divisors.  Quadrature outputs are inexact, so exact comparison with 0
#: would misclassify; override per call where needed.
ZERO_TOL = 1e-12

ComplexLike = Union[complex, float, np.ndarray]


@dataclass(frozen=True)
class BicomplexNumber:
    """Idempotent representation ``z1*E + z2*E'`` of a bicomplex number."""

    z1: ComplexLike
    z2: ComplexLike

    def __add__(self, other: "BicomplexNumber") -> "BicomplexNumber":
        other = _coerce(other)
        return BicomplexNumber(self.z1 + other.z1, self.z2 + other.z2)

    __radd__ = __add__

    def __sub__(self, other: "BicomplexNumber") -> "BicomplexNumber":
        other = _coerce(other)
        return BicomplexNumber(self.z1 - other.z1, self.z2 - other.z2)

    def __rsub__(self, other) -> "BicomplexNumber":
        return _coerce(other) - self

    def __mul__(self, other: "BicomplexNumber") -> "BicomplexNumber":
        other = _coerce(other)
        return BicomplexNumber(self.z1 * other.z1, self.z2 * other.z2)

    __rmul__ = __mul__

    def __neg__(self) -> "BicomplexNumber":
        return BicomplexNumber(-self.z1, -self.z2)

    def star(self) -> "BicomplexNumber":
        """Componentwise complex conjugation ``Z*``."""
        return BicomplexNumber(np.conjugate(self.z1), np.conjugate(self.z2))

    def mod_k(self) -> "HyperbolicNumber":
        """Hyperbolic modulus ``|Z|_k = |z1|*E + |z2|*E'``."""
        return HyperbolicNumber(abs(self.z1), abs(self.z2))

    def is_zero_divisor(self, tol: float = None) -> bool:
        tol = ZERO_TOL if tol is None else tol
        small1, small2 = abs(self.z1) <= tol, abs(self.z2) <= tol
        return bool(small1 != small2)

    def invert(self, tol: float = None) -> "BicomplexNumber":
        """Componentwise reciprocal; defined only away from the zero cone."""
        tol = ZERO_TOL if tol is None else tol
        small1, small2 = abs(self.z1) <= tol, abs(self.z2) <= tol
        if small1 and small2:
            raise ZeroError("cannot invert bicomplex zero")
        if small1 or small2:
            raise ZeroDivisorError(
                f"zero divisor is not invertible: ({self.z1}, {self.z2})"
            )
        return BicomplexNumber(1.0 / self.z1, 1.0 / self.z2)

    def to_cartesian(self) -> tuple:
        """Return ``(a, b)`` with ``Z = a + b*j``."""
        a = (self.z1 + self.z2) / 2.0
        b = 0.5j * (self.z1 - self.z2)
        return a, b

    def __str__(self) -> str:
        return f"{_fmt_complex(self.z1)} E + {_fmt_complex(self.z2)} E*"


@dataclass(frozen=True)
class HyperbolicNumber:
    """Hyperbolic number ``l1*E + l2*E'`` with real components."""

    l1: float
    l2: float

    def __add__(self, other: "HyperbolicNumber") -> "HyperbolicNumber":
        return HyperbolicNumber(self.l1 + other.l1, self.l2 + other.l2)

    def __sub__(self, other: "HyperbolicNumber") -> "HyperbolicNumber":
        return HyperbolicNumber(self.l1 - other.l1, self.l2 - other.l2)

    def __mul__(self, other: "HyperbolicNumber") -> "HyperbolicNumber":
        return HyperbolicNumber(self.l1 * other.l1, self.l2 * other.l2)

    def in_positive_cone(self, strict: bool = False) -> bool:
        if strict:
            return bool(self.l1 > 0 and self.l2 > 0)
        return bool(self.l1 >= 0 and self.l2 >= 0)

    def as_bicomplex(self) -> BicomplexNumber:
        return BicomplexNumber(complex(self.l1), complex(self.l2))

    def max(self) -> float:
        """Largest component, handy as a scalar residual size."""
        return float(np.maximum(self.l1, self.l2))


#: Multiplicative unit and the two idempotents.
ONE = BicomplexNumber(1.0 + 0.0j, 1.0 + 0.0j)
ZERO = BicomplexNumber(0.0j, 0.0j)
E = BicomplexNumber(1.0 + 0.0j, 0.0j)
E_DAG = BicomplexNumber(0.0j, 1.0 + 0.0j)


def _coerce(value) -> BicomplexNumber:
    if isinstance(value, BicomplexNumber):
        return value
    if isinstance(value, HyperbolicNumber):
        return value.as_bicomplex()
    if isinstance(value, (int, float, complex)):
        return BicomplexNumber(complex(value), complex(value))
    raise TypeError(f"cannot interpret {value!r} as a bicomplex number")


def bc_from_cartesian(a: complex, b: complex) -> BicomplexNumber:
    """Convert ``a + b*j`` to idempotent components ``(a - i*b, a + i*b)``."""
    return BicomplexNumber(a - 1j * b, a + 1j * b)


def bc_to_cartesian(x: BicomplexNumber) -> tuple:
    return x.to_cartesian()


def bc_mul(x: BicomplexNumber, y: BicomplexNumber) -> BicomplexNumber:
    return x * y


def bc_star(x: BicomplexNumber) -> BicomplexNumber:
    return x.star()


def bc_mod_k(x: BicomplexNumber) -> HyperbolicNumber:
    return x.mod_k()


def bc_inner_k(x: BicomplexNumber, y: BicomplexNumber) -> BicomplexNumber:
    """Hyperbolic-valued product ``(Z*W + W*Z)/2``; both components real."""
    s = x.star() * y + y.star() * x
    return BicomplexNumber(s.z1 / 2.0, s.z2 / 2.0)


def bc_invert(x: BicomplexNumber, tol: float = None) -> BicomplexNumber:
    return x.invert(tol=tol)


def d_leq(x: HyperbolicNumber, y: HyperbolicNumber) -> bool:
    """Partial order: ``x <= y`` iff ``y - x`` lies in the nonnegative cone."""
    return bool(y.l1 - x.l1 >= 0 and y.l2 - x.l2 >= 0)


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def bc_to_text(x: BicomplexNumber) -> str:
    """Serialize as ``"a+bi E + c+di E*"`` (grammar documented in the CLI)."""
    return str(x)


def bc_from_text(text: str) -> BicomplexNumber:
    """Parse the textual form produced by :func:`bc_to_text`."""
    body = text.strip()
    if not body.endswith("E*"):
        raise ValueError(f"malformed bicomplex literal: {text!r}")
    body = body[: -len("E*")].strip()
    parts = body.split(" E + ")
    if len(parts) != 2:
        raise ValueError(f"malformed bicomplex literal: {text!r}")
    return BicomplexNumber(_parse_complex(parts[0]), _parse_complex(parts[1]))


def _parse_complex(token: str) -> complex:
    cleaned = token.strip().replace(" ", "")
    if not cleaned.endswith("i"):
        raise ValueError(f"malformed complex component: {token!r}")
    return complex(cleaned[:-1] + "j")
