"""Points of the upper half plane and the Moebius action of G.

Two representations are used.  :class:`ExactPoint` is an imaginary quadratic
point (-b + sqrt(D)) / (2a), i.e. the root in H of the primitive positive
definite form (a, b, c) of discriminant D = b^2 - 4ac.  :class:`NumericPoint`
is an arbitrary-precision complex number with an explicit precision in
decimal digits.  Exact points are closed under the action and every exact
point is special; numeric points are used for generic (non-CM) samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Union

import mpmath

from .errors import AmbiguousFixpointError
from .gl2q import GroupElement, multiply, normalize_integer
from .numeric import exact_decimal, working_digits


@dataclass(frozen=True)
class ExactPoint:
    a: int
    b: int
    D: int

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("leading coefficient must be positive")
        if self.D >= 0:
            raise ValueError("discriminant must be negative")
        if (self.b * self.b - self.D) % (4 * self.a):
            raise ValueError(f"b^2 - D is not divisible by 4a for ({self.a}, {self.b}, {self.D})")
        if math.gcd(math.gcd(self.a, self.b), self.c) != 1:
            raise ValueError(f"form ({self.a}, {self.b}, {self.c}) is not primitive")

    @property
    def c(self) -> int:
        return (self.b * self.b - self.D) // (4 * self.a)

    @classmethod
    def from_form(cls, a: int, b: int, c: int) -> "ExactPoint":
        """The root in H of a x^2 + b x + c (any nonzero scaling of a definite form)."""
        g = reduce(math.gcd, (a, b, c))
        if a < 0:
            g = -g
        a, b, c = a // g, b // g, c // g
        return cls(a, b, b * b - 4 * a * c)

    @classmethod
    def imaginary(cls, t) -> "ExactPoint":
        """The point i*t for a positive rational t."""
        t = Fraction(t)
        if t <= 0:
            raise ValueError("i*t lies in H only for t > 0")
        return cls.from_form(t.denominator**2, 0, t.numerator**2)

    def complex(self) -> mpmath.mpc:
        """Value at the current working precision."""
        s = mpmath.sqrt(-self.D)
        return mpmath.mpc(-self.b, s) / (2 * self.a)

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "D": str(self.D)}


@dataclass(frozen=True)
class NumericPoint:
    re: mpmath.mpf
    im: mpmath.mpf
    prec: int

    def __post_init__(self):
        if not self.im > 0:
            raise ValueError("imaginary part must be positive")
        if self.prec < 1:
            raise ValueError("precision must be at least one digit")

    @classmethod
    def from_complex(cls, z, prec: int) -> "NumericPoint":
        with working_digits(prec):
            z = mpmath.mpc(z)
            return cls(+z.real, +z.imag, prec)

    @classmethod
    def from_strings(cls, re: str, im: str, prec: int) -> "NumericPoint":
        # enough digits to take exact decimals back to the same binary number
        with working_digits(max(prec, len(re) + 5, len(im) + 5)):
            return cls(mpmath.mpf(re), mpmath.mpf(im), prec)

    def complex(self) -> mpmath.mpc:
        return mpmath.mpc(self.re, self.im)

    def to_json(self) -> dict:
        return {"re": exact_decimal(self.re), "im": exact_decimal(self.im), "prec": self.prec}


HalfPlanePoint = Union[ExactPoint, NumericPoint]


def point_from_json(obj: dict) -> HalfPlanePoint:
    if "D" in obj:
        return ExactPoint(int(obj["a"]), int(obj["b"]), int(obj["D"]))
    return NumericPoint.from_strings(str(obj["re"]), str(obj["im"]), int(obj["prec"]))


def _transform_form(a: int, b: int, c: int, g: GroupElement) -> tuple[int, int, int]:
    # form of g.tau, obtained by substituting tau = g^-1 tau'
    p, q, r, s = g.a, g.b, g.c, g.d
    A = a * s * s - b * s * r + c * r * r
    B = -2 * a * s * q + b * (s * p + q * r) - 2 * c * r * p
    C = a * q * q - b * q * p + c * p * p
    return A, B, C


def apply(g: GroupElement, tau: HalfPlanePoint) -> HalfPlanePoint:
    """g . tau = (a tau + b) / (c tau + d)."""
    if isinstance(tau, ExactPoint):
        return ExactPoint.from_form(*_transform_form(tau.a, tau.b, tau.c, g))
    with working_digits(tau.prec + 10):
        z = tau.complex()
        w = (g.a * z + g.b) / (g.c * z + g.d)
        return NumericPoint(+w.real, +w.imag, tau.prec)


def is_reduced(tau: HalfPlanePoint) -> bool:
    """tau lies in the closed standard fundamental domain."""
    if isinstance(tau, ExactPoint):
        return abs(tau.b) <= tau.a <= tau.c
    with working_digits(tau.prec + 10):
        return abs(tau.re) <= 0.5 and tau.re**2 + tau.im**2 >= 1


def reduce_point(tau: HalfPlanePoint) -> tuple[HalfPlanePoint, GroupElement]:
    """Move tau into the standard fundamental domain.

    Returns (tau', gamma) with gamma in SL2(Z) and tau' = gamma . tau.
    Exact points come back as reduced forms (|b| <= a <= c).
    """
    gamma = GroupElement.identity()
    if isinstance(tau, ExactPoint):
        a, b, c = tau.a, tau.b, tau.c
        while True:
            # Re(tau) = -b / 2a; translate by k = round(b / 2a)
            k = (b + a) // (2 * a)
            if k:
                shift = GroupElement(1, k, 0, 1)
                a, b, c = _transform_form(a, b, c, shift)
                gamma = multiply(shift, gamma)
            if c < a:
                inv = GroupElement(0, 1, -1, 0)
                a, b, c = _transform_form(a, b, c, inv)
                gamma = multiply(inv, gamma)
                continue
            break
        if b < 0 and (a == c or -b == a):
            # boundary: pick the representative with b >= 0
            fix = GroupElement(0, 1, -1, 0) if a == c else GroupElement(1, -1, 0, 1)
            a, b, c = _transform_form(a, b, c, fix)
            gamma = multiply(fix, gamma)
        return ExactPoint.from_form(a, b, c), gamma

    with working_digits(tau.prec + 10):
        z = tau.complex()
        for _ in range(10_000):
            k = int(mpmath.nint(z.real))
            if k:
                z -= k
                gamma = multiply(GroupElement(1, -k, 0, 1), gamma)
            if abs(z) < 1:
                z = -1 / z
                gamma = multiply(GroupElement(0, 1, -1, 0), gamma)
                continue
            break
        else:
            raise RuntimeError("fundamental domain reduction did not terminate")
        return NumericPoint(+z.real, +z.imag, tau.prec), gamma


def is_special(g: GroupElement) -> bool:
    """g is elliptic: (a + d)^2 < 4 det, so it has exactly one fixed point in H."""
    return g.trace**2 < 4 * g.level


def fixed_point(g: GroupElement) -> ExactPoint | None:
    """The fixed point of g in H, or None if g is parabolic or hyperbolic."""
    if g.is_identity():
        raise AmbiguousFixpointError("the identity fixes every point")
    if not is_special(g):
        return None
    # c tau^2 + (d - a) tau - b = 0; c != 0 for elliptic g
    return ExactPoint.from_form(g.c, g.d - g.a, -g.b)


def special_discriminant(tau: HalfPlanePoint, bound: int) -> int | None:
    """Discriminant of tau if it is an imaginary quadratic point with |D| <= bound.

    Exact points answer exactly (they are always special, the bound is not
    consulted).  Numeric points are reduced to the fundamental domain and
    compared against every reduced form of discriminant at least -bound at
    their own precision, so the answer for them is a bounded search, not a
    proof of non-speciality.
    """
    if isinstance(tau, ExactPoint):
        return tau.D
    red, _ = reduce_point(tau)
    with working_digits(red.prec + 10):
        tol = mpmath.mpf(10) ** (5 - red.prec)
        a_max = math.isqrt(bound // 3) + 1
        for a in range(1, a_max + 1):
            b = -2 * a * red.re
            bi = int(mpmath.nint(b))
            if abs(b - bi) > tol * 2 * a:
                continue
            disc = -((2 * a * red.im) ** 2)
            Di = int(mpmath.nint(disc))
            if Di >= 0 or -Di > bound or abs(disc - Di) > tol * 8 * a * a * (1 + red.im) ** 2:
                continue
            if (bi * bi - Di) % (4 * a) == 0:
                c = (bi * bi - Di) // (4 * a)
                g = math.gcd(math.gcd(a, bi), c)
                return Di // (g * g)
    return None
