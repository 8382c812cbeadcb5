"""Value types for the cylinder group, its dual, and their automorphisms.

The cylinder is R x T with points stored as (t, theta), theta the angle of the
circle coordinate reduced to [0, 2*pi).  Its dual is R x Z with elements
(s, n), and the pairing is <(t, theta), (s, n)> = exp(i*(s*t + n*theta)).

Every topological automorphism of R x Z acts as (s, n) -> (a*s + c*n, p*n)
with a != 0 real and p = +-1; the adjoint action on the cylinder is
(t, theta) -> (a*t, c*t + p*theta mod 2*pi).  Both actions are carried by the
same (a, c, p) triple.

Scalars on the dual side are type preserving: feed `Fraction` values in and
all algebra stays exact, which is what the algebraic checkers rely on.  The
point side reduces angles mod 2*pi and is therefore float-valued.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

TWO_PI = 2.0 * math.pi

_EXACT_TYPES = (int, Fraction)


def is_exact(*values) -> bool:
    """True when every value is an int or a Fraction."""
    return all(isinstance(v, _EXACT_TYPES) for v in values)


def exact_div(num, den):
    """Division that yields a Fraction whenever both operands are exact."""
    if is_exact(num, den):
        return Fraction(num) / Fraction(den)
    return num / den


def reduce_angle(theta) -> float:
    """Reduce an angle to [0, 2*pi)."""
    r = math.fmod(float(theta), TWO_PI)
    return r + TWO_PI if r < 0.0 else r


@dataclass(frozen=True)
class CylinderPoint:
    """Element (t, z) of R x T, with z = exp(i*theta) and theta in [0, 2*pi)."""

    t: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "theta", reduce_angle(self.theta))

    def __add__(self, other: "CylinderPoint") -> "CylinderPoint":
        return CylinderPoint(self.t + other.t, self.theta + other.theta)

    def __neg__(self) -> "CylinderPoint":
        return CylinderPoint(-self.t, -self.theta)

    def __sub__(self, other: "CylinderPoint") -> "CylinderPoint":
        return self + (-other)


@dataclass(frozen=True)
class DualPoint:
    """Element (s, n) of the dual group R x Z; addition is componentwise."""

    s: object
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise TypeError(f"integer coordinate must be an int, got {self.n!r}")

    def __add__(self, other: "DualPoint") -> "DualPoint":
        return DualPoint(self.s + other.s, self.n + other.n)

    def __neg__(self) -> "DualPoint":
        return DualPoint(-self.s, -self.n)

    def __sub__(self, other: "DualPoint") -> "DualPoint":
        return self + (-other)

    def is_zero(self) -> bool:
        return self.s == 0 and self.n == 0


@dataclass(frozen=True)
class CylinderAuto:
    """Automorphism (s, n) -> (a*s + c*n, p*n) of R x Z and its adjoint on R x T."""

    a: object
    c: object = 0
    p: int = 1

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("multiplier a must be nonzero")
        if self.p not in (1, -1):
            raise ValueError(f"circle exponent p must be +1 or -1, got {self.p!r}")

    @classmethod
    def identity(cls) -> "CylinderAuto":
        return cls(1, 0, 1)

    @classmethod
    def sign(cls, p: int) -> "CylinderAuto":
        """The automorphism z -> z^p of the circle factor, trivial on R."""
        return cls(1, 0, p)

    def is_identity(self) -> bool:
        return self.a == 1 and self.c == 0 and self.p == 1

    def is_plus_minus_identity(self) -> bool:
        return self.c == 0 and ((self.a == 1 and self.p == 1) or (self.a == -1 and self.p == -1))

    def on_dual(self, y: DualPoint) -> DualPoint:
        return DualPoint(self.a * y.s + self.c * y.n, self.p * y.n)

    def on_point(self, x: CylinderPoint) -> CylinderPoint:
        return CylinderPoint(float(self.a) * x.t, float(self.c) * x.t + self.p * x.theta)

    def __matmul__(self, other: "CylinderAuto") -> "CylinderAuto":
        # Matrix product: applying self after other on the dual side.
        return CylinderAuto(
            self.a * other.a,
            self.a * other.c + self.c * other.p,
            self.p * other.p,
        )

    def inverse(self) -> "CylinderAuto":
        a_inv = exact_div(1, self.a)
        return CylinderAuto(a_inv, -exact_div(self.c * self.p, self.a), self.p)

    def preserves_line(self, omega, tol: float = 1e-12) -> bool:
        """Whether the line {(t, omega*t mod 2*pi)} is invariant: c = (a - p)*omega.

        Exact inputs are compared exactly; otherwise an absolute tolerance is used.
        """
        lhs = self.c
        rhs = (self.a - self.p) * omega
        if is_exact(lhs, rhs):
            return lhs == rhs
        return abs(lhs - rhs) <= tol


def pair(x: CylinderPoint, y: DualPoint) -> complex:
    """Value of the character y at the point x: exp(i*(s*t + n*theta))."""
    return cmath.exp(1j * (float(y.s) * x.t + y.n * x.theta))


def compose(e1: CylinderAuto, e2: CylinderAuto) -> CylinderAuto:
    return e1 @ e2
