"""Classical modular polynomials Phi_N(X, Y).

Phi_N is recovered from its values: for sample points tau_k = i (1 + k/17),
the polynomial prod_{g in Gamma \\ G_N} (X - j(g tau_k)) has coefficients that
are integer polynomials of degree psi(N) in Y = j(tau_k).  Those coefficients
are interpolated at high precision and rounded; a coefficient further than
0.01 from an integer, or a rounded result that is not monic and symmetric,
means the precision was too low.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Mapping

import mpmath

from . import cache
from .errors import PrecisionError
from .gl2q import coset_representatives, prime_factors, psi
from .halfplane import ExactPoint, apply
from .jfun import evaluate_j
from .numeric import (
    GUARD_DIGITS,
    Approx,
    as_approx,
    is_exact,
    log10_abs,
    working_digits,
)

ROUNDING_TOLERANCE = mpmath.mpf("0.01")


@dataclass(frozen=True)
class BivariatePolynomial:
    """Sparse integer polynomial sum c_ij X^i Y^j."""

    terms: Mapping[tuple[int, int], int]

    def __post_init__(self):
        object.__setattr__(self, "terms", {k: v for k, v in sorted(self.terms.items()) if v})

    def __eq__(self, other) -> bool:
        return isinstance(other, BivariatePolynomial) and self.terms == other.terms

    __hash__ = None

    @property
    def degree_x(self) -> int:
        return max((i for i, _ in self.terms), default=0)

    @property
    def degree_y(self) -> int:
        return max((j for _, j in self.terms), default=0)

    def coefficient(self, i: int, j: int) -> int:
        return self.terms.get((i, j), 0)

    def is_symmetric(self) -> bool:
        return all(self.terms.get((j, i), 0) == c for (i, j), c in self.terms.items())

    def is_monic_x(self) -> bool:
        """X^deg has coefficient exactly 1 (no Y dependence)."""
        n = self.degree_x
        return [(j, c) for (i, j), c in self.terms.items() if i == n] == [(0, 1)]

    def swap(self) -> "BivariatePolynomial":
        return BivariatePolynomial({(j, i): c for (i, j), c in self.terms.items()})

    def reduce_mod(self, n: int) -> dict[tuple[int, int], int]:
        return {k: v % n for k, v in self.terms.items() if v % n}

    def __call__(self, x, y):
        return phi_eval(self, x, y)


def modular_text(poly: BivariatePolynomial, header: str) -> str:
    lines = [header]
    lines += [f"{i} {j} {c}" for (i, j), c in sorted(poly.terms.items())]
    return "\n".join(lines) + "\n"


def to_text(poly: BivariatePolynomial, n: int) -> str:
    """Serialize as ``PHI N <n>`` followed by ``i j coefficient`` lines sorted by (i, j)."""
    return modular_text(poly, f"PHI N {n}")


def from_text(text: str) -> tuple[int, BivariatePolynomial]:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty polynomial file")
    head = lines[0].split()
    if len(head) != 3 or head[:2] != ["PHI", "N"]:
        raise ValueError(f"bad header {lines[0]!r}")
    terms = {}
    for line in lines[1:]:
        i, j, c = line.split()
        terms[int(i), int(j)] = int(c)
    return int(head[2]), BivariatePolynomial(terms)


def _scale_log10(poly: BivariatePolynomial, x: Approx, y: Approx) -> float:
    lx = log10_abs(abs(x.value) + x.radius) if abs(x.value) + x.radius > 0 else -math.inf
    ly = log10_abs(abs(y.value) + y.radius) if abs(y.value) + y.radius > 0 else -math.inf
    best = -math.inf
    for (i, j), c in poly.terms.items():
        t = math.log10(abs(c))
        if i:
            t += i * lx
        if j:
            t += j * ly
        best = max(best, t)
    return best


def phi_eval(poly: BivariatePolynomial, x, y):
    """Evaluate poly at (x, y).

    Exact inputs (int or Fraction) give an exact result.  Otherwise the
    inputs are treated as balls (see :class:`jcover.numeric.Approx`) and the
    result is an Approx whose radius bounds both the input uncertainty and
    the rounding of the evaluation.
    """
    if is_exact(x) and is_exact(y):
        x, y = Fraction(x), Fraction(y)
        total = Fraction(0)
        for (i, j), c in poly.terms.items():
            total += c * x**i * y**j
        return total.numerator if total.denominator == 1 else total

    with working_digits(30):
        xa, ya = as_approx(x), as_approx(y)
        scale = _scale_log10(poly, xa, ya)
        rad = max(xa.radius, ya.radius)
        input_digits = 30 if rad == 0 else max(30, int(-float(mpmath.log10(rad))) + 10)
    dps = input_digits + GUARD_DIGITS + max(0, int(scale) + 1)
    with working_digits(dps):
        xv, yv = xa.value, ya.value
        ax, ay = abs(xv), abs(yv)
        bx, by = ax + xa.radius, ay + ya.radius
        value = mpmath.mpc(0)
        spread = mpmath.mpf(0)
        magnitude = mpmath.mpf(0)
        for (i, j), c in poly.terms.items():
            value += c * xv**i * yv**j
            spread += abs(c) * (bx**i * by**j - ax**i * ay**j)
            magnitude += abs(c) * bx**i * by**j
        rounding = magnitude * mpmath.mpf(10) ** (10 - dps)
        return Approx(+value, +(spread + rounding))


def interpolate_coefficients(xs: list, ys: list) -> list:
    """Monomial coefficients (low to high) of the interpolant through (xs, ys).

    Newton divided differences at the current working precision.
    """
    n = len(xs)
    dd = list(ys)
    for k in range(1, n):
        for i in range(n - 1, k - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - k])
    coeffs = [mpmath.mpf(0)] * n
    for k in range(n - 1, -1, -1):
        # coeffs <- coeffs * (Y - xs[k]) + dd[k]
        shifted = [mpmath.mpf(0)] + coeffs[:-1]
        coeffs = [s - xs[k] * c for s, c in zip(shifted, coeffs)]
        coeffs[0] += dd[k]
    return coeffs


def _poly_from_roots(roots: list) -> list:
    """Coefficients (low to high) of prod (X - r)."""
    coeffs = [mpmath.mpc(1)]
    for r in roots:
        nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] += c
            nxt[k] -= r * c
        coeffs = nxt
    return coeffs


def sample_point(k: int) -> ExactPoint:
    return ExactPoint.imaginary(Fraction(17 + k, 17))


def modular_polynomial(n: int, digits: int) -> BivariatePolynomial:
    """Phi_n computed by interpolation with j-values accurate to 10^-digits.

    Raises PrecisionError when a coefficient cannot be rounded within 0.01 or
    the rounded polynomial fails the symmetry or monicity check.
    """
    if n < 1:
        raise ValueError("level must be a positive integer")
    reps = coset_representatives(n)
    deg = len(reps)
    nodes = []
    samples: list[list] = [[] for _ in range(deg + 1)]
    top = 0.0
    for k in range(deg + 1):
        tau = sample_point(k)
        node = evaluate_j(tau, digits)
        orbit = [evaluate_j(apply(g, tau), digits) for g in reps]
        with working_digits(digits + GUARD_DIGITS):
            mag = sum(max(0.0, log10_abs(v)) for v in orbit)
        top = max(top, mag)
        with working_digits(digits + GUARD_DIGITS + int(mag) + 5):
            coeffs = _poly_from_roots(orbit)
            nodes.append(+node.real)
            for m, c in enumerate(coeffs):
                samples[m].append(+c.real)

    terms: dict[tuple[int, int], int] = {}
    with working_digits(digits + GUARD_DIGITS + int(top) + 10):
        for m in range(deg + 1):
            for j, c in enumerate(interpolate_coefficients(nodes, samples[m])):
                r = int(mpmath.nint(c))
                if abs(c - r) > ROUNDING_TOLERANCE:
                    raise PrecisionError(
                        f"Phi_{n}: coefficient of X^{m} Y^{j} is {float(c - r):+.3g} from an integer "
                        f"at {digits} digits"
                    )
                if r:
                    terms[m, j] = r
    poly = BivariatePolynomial(terms)
    if not poly.is_monic_x() or poly.degree_x != deg:
        raise PrecisionError(f"Phi_{n} is not monic of X-degree {deg} at {digits} digits")
    if n > 1 and not poly.is_symmetric():
        raise PrecisionError(f"Phi_{n} is not symmetric at {digits} digits")
    return poly


def default_digits(n: int) -> int:
    """Starting precision: a height estimate for Phi_n plus interpolation headroom."""
    d = psi(n)
    height = (6 * d * math.log(n) + 16 * d) / math.log(10) if n > 1 else 1
    return int(40 + height + 2 * d)


_memory: dict[int, BivariatePolynomial] = {}
_memory_lock = threading.Lock()


def get_modular_polynomial(n: int, digits: int | None = None, use_cache: bool = True) -> BivariatePolynomial:
    """Phi_n from memory, the disk cache, or a fresh computation.

    A fresh computation starts at ``digits`` (or :func:`default_digits`) and
    doubles the precision after each PrecisionError.
    """
    with _memory_lock:
        if use_cache and n in _memory:
            return _memory[n]
    name = f"phi_{n}.txt"
    if use_cache:
        text = cache.read(name)
        if text is not None:
            level, poly = from_text(text)
            if level == n:
                with _memory_lock:
                    _memory[n] = poly
                return poly
    d = digits or default_digits(n)
    for _ in range(6):
        try:
            poly = modular_polynomial(n, d)
            break
        except PrecisionError:
            d *= 2
    else:
        raise PrecisionError(f"Phi_{n} could not be certified up to {d // 2} digits")
    if use_cache:
        cache.write(name, to_text(poly, n))
        with _memory_lock:
            _memory[n] = poly
    return poly


def kronecker_check(n: int, poly: BivariatePolynomial | None = None) -> bool:
    """Phi_p == (X^p - Y)(X - Y^p) mod p, coefficient-wise."""
    if prime_factors(n) != [n]:
        raise ValueError(f"{n} is not prime")
    if poly is None:
        poly = get_modular_polynomial(n)
    expected = {(n + 1, 0): 1, (n, n): -1, (1, 1): -1, (0, n + 1): 1}
    expected = {k: v % n for k, v in expected.items() if v % n}
    return poly.reduce_mod(n) == expected
