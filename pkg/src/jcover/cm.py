"""Reduced binary quadratic forms and Hilbert (ring) class polynomials.

For a negative discriminant D the reduced primitive forms (a, b, c) give the
CM points (-b + sqrt(D)) / 2a in the standard fundamental domain; H_D is the
product of X - j over those points.  Non-fundamental discriminants are
accepted and give ring class polynomials.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from . import cache
from .errors import IndeterminateError, InvalidDiscriminantError, PrecisionError
from .halfplane import ExactPoint
from .jfun import evaluate_j_detailed
from .numeric import GUARD_DIGITS, Tri, as_approx, classify_zero, is_exact, log10_abs, working_digits

ROUNDING_TOLERANCE = mpmath.mpf("0.01")


@dataclass(frozen=True, order=True)
class QuadraticForm:
    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        return b >= 0 or (abs(b) != a and a != c)

    def point(self) -> ExactPoint:
        return ExactPoint(self.a, self.b, self.discriminant)


def check_discriminant(d: int) -> None:
    if d >= 0 or d % 4 not in (0, 1):
        raise InvalidDiscriminantError(f"{d} is not a negative discriminant (must be < 0 and 0 or 1 mod 4)")


@lru_cache(maxsize=None)
def reduced_forms(d: int) -> tuple[QuadraticForm, ...]:
    """All reduced primitive forms of discriminant d, sorted by (a, b)."""
    check_discriminant(d)
    out = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b - d) % 2 or (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or math.gcd(math.gcd(a, b), c) != 1:
                continue
            f = QuadraticForm(a, b, c)
            if f.is_reduced():
                out.append(f)
        a += 1
    out.sort(key=lambda f: (f.a, f.b))
    return tuple(out)


def class_number(d: int) -> int:
    return len(reduced_forms(d))


@dataclass(frozen=True)
class ClassPolynomial:
    """Monic H_D as integer coefficients, constant term first."""

    discriminant: int
    coefficients: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        if is_exact(x):
            acc = Fraction(0)
            for c in reversed(self.coefficients):
                acc = acc * x + c
            return acc.numerator if acc.denominator == 1 else acc
        # numeric: plain Horner at the caller's working precision
        acc = mpmath.mpc(0)
        for c in reversed(self.coefficients):
            acc = acc * as_approx(x).value + c
        return acc

    def to_text(self) -> str:
        lines = [f"HCLASS D {self.discriminant}"]
        lines += [f"{i} {c}" for i, c in enumerate(self.coefficients) if c]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ClassPolynomial":
        lines = text.splitlines()
        head = lines[0].split() if lines else []
        if len(head) != 3 or head[:2] != ["HCLASS", "D"]:
            raise ValueError(f"bad header {lines[0] if lines else ''!r}")
        terms = {}
        for line in lines[1:]:
            i, c = line.split()
            terms[int(i)] = int(c)
        deg = max(terms)
        return cls(int(head[2]), tuple(terms.get(i, 0) for i in range(deg + 1)))


def default_digits(d: int) -> int:
    check_discriminant(d)
    height = math.pi * math.sqrt(-d) / math.log(10) * sum(Fraction(1, f.a) for f in reduced_forms(d))
    return int(15 + float(height))


def class_polynomial(d: int, digits: int | None = None) -> ClassPolynomial:
    """H_D from the CM values at ``digits`` digits, rounded with tolerance 0.01."""
    forms = reduced_forms(d)
    if digits is None:
        digits = default_digits(d)
    roots = [evaluate_j_detailed(f.point(), digits).value for f in forms]
    with working_digits(digits + GUARD_DIGITS):
        mag = sum(max(0.0, log10_abs(r)) for r in roots)
    with working_digits(digits + GUARD_DIGITS + int(mag) + 5):
        coeffs = [mpmath.mpc(1)]
        for r in roots:
            nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for k, c in enumerate(coeffs):
                nxt[k + 1] += c
                nxt[k] -= r * c
            coeffs = nxt
        out = []
        for k, c in enumerate(coeffs):
            r = int(mpmath.nint(c.real))
            if abs(c - r) > ROUNDING_TOLERANCE:
                raise PrecisionError(f"H_{d}: coefficient of X^{k} is not within 0.01 of an integer at {digits} digits")
            out.append(r)
    if out[-1] != 1:
        raise PrecisionError(f"H_{d} is not monic at {digits} digits")
    return ClassPolynomial(d, tuple(out))


_memory: dict[int, ClassPolynomial] = {}
_memory_lock = threading.Lock()


def get_class_polynomial(d: int, digits: int | None = None, use_cache: bool = True) -> ClassPolynomial:
    """H_D from memory, the disk cache or a fresh computation (doubling digits on failure)."""
    check_discriminant(d)
    with _memory_lock:
        if use_cache and d in _memory:
            return _memory[d]
    name = f"hclass_{-d}.txt"
    if use_cache:
        text = cache.read(name)
        if text is not None:
            poly = ClassPolynomial.from_text(text)
            if poly.discriminant == d:
                with _memory_lock:
                    _memory[d] = poly
                return poly
    prec = digits or default_digits(d)
    for _ in range(6):
        try:
            poly = class_polynomial(d, prec)
            break
        except PrecisionError:
            prec *= 2
    else:
        raise PrecisionError(f"H_{d} could not be certified up to {prec // 2} digits")
    if use_cache:
        cache.write(name, poly.to_text())
        with _memory_lock:
            _memory[d] = poly
    return poly


def discriminants(bound: int) -> list[int]:
    """Negative discriminants D with |D| <= bound, by increasing |D|."""
    return [-n for n in range(3, bound + 1) if (-n) % 4 in (0, 1)]


@lru_cache(maxsize=None)
def _class_number_one_values(bound: int) -> tuple[tuple[int, int], ...]:
    out = []
    for d in discriminants(bound):
        if class_number(d) == 1:
            out.append((d, -get_class_polynomial(d).coefficients[0]))
    return tuple(out)


def is_cm_value(j, discriminant_bound: int = 100, digits: int = 30) -> int | None:
    """Smallest |D| <= bound such that j is a root of H_D, as the discriminant D.

    A rational j can only be a root of an H_D of degree one, since H_D is
    irreducible over Q; those are compared exactly.  A numeric j (mpc or
    Approx) is compared against every CM value of each discriminant and an
    uncertifiable comparison raises IndeterminateError.
    """
    if discriminant_bound < 3:
        raise ValueError("discriminant bound must be at least 3")
    if is_exact(j):
        j = Fraction(j)
        for d, value in _class_number_one_values(discriminant_bound):
            if j == value:
                return d
        return None
    x = as_approx(j)
    for d in discriminants(discriminant_bound):
        for f in reduced_forms(d):
            ev = evaluate_j_detailed(f.point(), digits)
            with working_digits(digits + GUARD_DIGITS):
                radius = x.radius + ev.error + abs(ev.value) * mpmath.mpf(10) ** (-digits)
                verdict = classify_zero(abs(x.value - ev.value), radius)
            if verdict is Tri.INDETERMINATE:
                raise IndeterminateError(f"cannot decide whether the value is a CM value of discriminant {d}")
            if verdict is Tri.TRUE:
                return d
    return None
