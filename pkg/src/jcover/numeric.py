"""Precision management and error-carrying numbers.

mpmath keeps its working precision in a process-wide context, so every
routine that changes it goes through :func:`working_digits`, which holds a
re-entrant lock for the duration.  Values handed back to callers are plain
mpmath numbers and keep their full mantissa after the block exits.
"""

from __future__ import annotations

import enum
import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import mpmath
from mpmath import mp

from .errors import IndeterminateError

GUARD_DIGITS = 20

# ratio between "clearly nonzero" and the certified error radius
INDETERMINATE_MARGIN = 10**6

_LOCK = threading.RLock()


@contextmanager
def working_digits(dps: int) -> Iterator[None]:
    with _LOCK:
        with mp.workdps(int(dps)):
            yield


@dataclass(frozen=True)
class Approx:
    """A complex number known to lie within ``radius`` of ``value``."""

    value: mpmath.mpc
    radius: mpmath.mpf

    @classmethod
    def exact(cls, x) -> "Approx":
        return cls(mpmath.mpc(to_mpf(x)), mpmath.mpf(0))

    def overlaps(self, other: "Approx") -> bool:
        return abs(self.value - other.value) <= self.radius + other.radius

    def __str__(self) -> str:
        return f"{format_mp(self.value.real)} + {format_mp(self.value.imag)}i (+/- {mpmath.nstr(self.radius, 3)})"


Value = Union[int, Fraction, Approx]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def as_approx(x) -> Approx:
    if isinstance(x, Approx):
        return x
    if isinstance(x, mpmath.mpc):
        return Approx(x, mpmath.mpf(0))
    return Approx.exact(x)


def mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    """Exact rational value of a binary floating point number."""
    man, exp = x.man_exp  # unsigned mantissa
    man = -int(man) if x < 0 else int(man)
    if exp >= 0:
        return Fraction(man << exp)
    return Fraction(man, 1 << -exp)


def format_mp(x, digits: int | None = None) -> str:
    """Plain decimal rendering of an mpf, without exponent notation."""
    if digits is None:
        digits = mp.dps
    s = mpmath.nstr(x, digits, min_fixed=-math.inf, max_fixed=math.inf, strip_zeros=True)
    return s[:-2] if s.endswith(".0") else s


def exact_decimal(x: mpmath.mpf) -> str:
    """The finite decimal expansion of a binary mpf, digit for digit."""
    frac = mpf_to_fraction(x)
    sign = "-" if frac < 0 else ""
    num, den = abs(frac.numerator), frac.denominator
    places = den.bit_length() - 1  # den is a power of two
    digits = str(num * 5**places).rjust(places + 1, "0")
    if not places:
        return sign + digits
    whole, part = digits[:-places], digits[-places:].rstrip("0")
    return sign + whole + ("." + part if part else "")


def log10_abs(x) -> float:
    """Rough log10 |x|, -inf for zero; works for any mpmath or Python number."""
    a = abs(x)
    if a == 0:
        return -math.inf
    return float(mpmath.log10(a))


class Tri(enum.Enum):
    """Three-valued outcome of a numeric zero test.

    ``bool(Tri.INDETERMINATE)`` raises, so an uncertified verdict can never be
    silently read as false.
    """

    TRUE = "true"
    FALSE = "false"
    INDETERMINATE = "indeterminate"

    def __bool__(self) -> bool:
        if self is Tri.INDETERMINATE:
            raise IndeterminateError("numeric relation is indeterminate")
        return self is Tri.TRUE

    @classmethod
    def of(cls, flag: bool) -> "Tri":
        return cls.TRUE if flag else cls.FALSE


def classify_zero(magnitude, radius) -> Tri:
    """Decide whether a quantity known to within ``radius`` vanishes."""
    if magnitude <= radius:
        return Tri.TRUE
    if magnitude > radius * INDETERMINATE_MARGIN:
        return Tri.FALSE
    return Tri.INDETERMINATE
