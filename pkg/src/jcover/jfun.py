"""The modular j-function: exact q-expansion and certified evaluation.

The coefficients of j(q) = 1/q + 744 + 196884 q + ... are obtained exactly as
E4^3 / (q prod (1 - q^n)^24).  Evaluation first moves tau into the standard
fundamental domain, where |q| <= exp(-pi sqrt 3), and truncates the series
using the coefficient bound c(n) <= exp(4 pi sqrt n).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

from .errors import ExcludedJError, SingularCurveError
from .halfplane import HalfPlanePoint, reduce_point
from .numeric import GUARD_DIGITS, Approx, working_digits


def _mul(f: list[int], g: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, fi in enumerate(f[:n]):
        if fi:
            for j, gj in enumerate(g[: n - i]):
                out[i + j] += fi * gj
    return out


def _eta_product(n: int) -> list[int]:
    """prod_{k >= 1} (1 - q^k) mod q^n via the pentagonal number theorem."""
    out = [0] * n
    k = 0
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 >= n:
            break
        sign = -1 if k % 2 else 1
        out[e1] += sign
        if k and e2 < n:
            out[e2] += sign
        k += 1
    return out


def _sigma3(n: int) -> int:
    return sum(d**3 for d in range(1, n + 1) if n % d == 0)


def _series_div(f: list[int], g: list[int], n: int) -> list[int]:
    # g[0] == 1
    out = [0] * n
    for i in range(n):
        s = f[i] - sum(out[k] * g[i - k] for k in range(max(0, i - len(g) + 1), i))
        out[i] = s
    return out


def _compute_coefficients(count: int) -> list[int]:
    """c(-1), c(0), ..., c(count - 2)."""
    e4 = [1] + [240 * _sigma3(k) for k in range(1, count)]
    e4_cubed = _mul(_mul(e4, e4, count), e4, count)
    p = _eta_product(count)
    p2 = _mul(p, p, count)
    p4 = _mul(p2, p2, count)
    p8 = _mul(p4, p4, count)
    p16 = _mul(p8, p8, count)
    p24 = _mul(p16, p8, count)
    return _series_div(e4_cubed, p24, count)


@dataclass(frozen=True)
class JSeries:
    """Exact coefficients c(-1), c(0), ..., c(order) of j."""

    order: int
    coefficients: tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        if not -1 <= n <= self.order:
            raise IndexError(n)
        return self.coefficients[n + 1]


_cache_lock = threading.Lock()
_cached: list[int] = []


def j_coefficients(order: int) -> JSeries:
    if order < 0:
        raise ValueError("order must be non-negative")
    global _cached
    need = order + 2
    with _cache_lock:
        if len(_cached) < need:
            _cached = _compute_coefficients(max(need, 2 * len(_cached)))
        coeffs = tuple(_cached[:need])
    return JSeries(order, coeffs)


def tail_log_bound(order: int, y: float) -> float:
    """Natural log of an upper bound on sum_{n > order} c(n) exp(-2 pi y n).

    Requires y > 1/sqrt(order + 1) so the majorant decays geometrically.
    """
    m = order + 1
    log_ratio = 2 * math.pi * (1 / math.sqrt(m) - y)
    if log_ratio >= 0:
        return math.inf
    first = 4 * math.pi * math.sqrt(m) - 2 * math.pi * y * m
    return first - math.log1p(-math.exp(log_ratio))


def truncation_order(digits: int, y: float) -> int:
    """Smallest order whose tail bound is below 10^-(digits + 5)."""
    target = -(digits + 5) * math.log(10)
    order = 2
    while tail_log_bound(order, y) > target:
        order += 1
    return order


@dataclass(frozen=True)
class JEvaluation:
    value: mpmath.mpc
    error: mpmath.mpf
    order: int

    def approx(self) -> Approx:
        return Approx(self.value, self.error)


def evaluate_j_detailed(tau: HalfPlanePoint, digits: int, order: int | None = None) -> JEvaluation:
    """j(tau) to absolute accuracy 10^-digits, with the bound actually achieved.

    ``order`` overrides the automatic truncation order (used to check the
    reported tail bound against a longer expansion).
    """
    if digits < 1:
        raise ValueError("precision must be at least one digit")
    red, _ = reduce_point(tau)
    with working_digits(30):
        y = float(red.complex().imag)
    if order is None:
        order = truncation_order(digits, y)
    mag = int(2 * math.pi * y / math.log(10)) + 2
    dps = digits + GUARD_DIGITS + mag
    series = j_coefficients(order)
    with working_digits(dps):
        z = red.complex()
        q = mpmath.expjpi(2 * z)
        acc = mpmath.mpc(0)
        for n in range(order, -1, -1):
            acc = acc * q + series[n]
        value = acc + 1 / q
        tail = mpmath.exp(tail_log_bound(order, y))
        rounding = mpmath.mpf(10) ** (mag + 3 - dps) * (order + 2)
        error = tail + rounding
        return JEvaluation(+value, +error, order)


def evaluate_j(tau: HalfPlanePoint, digits: int) -> mpmath.mpc:
    return evaluate_j_detailed(tau, digits).value


Scalar = Union[int, Fraction, mpmath.mpf, mpmath.mpc]


@dataclass(frozen=True)
class WeierstrassCurve:
    """y^2 = 4x^3 - g2 x - g3."""

    g2: Scalar
    g3: Scalar

    @property
    def discriminant(self):
        return self.g2**3 - 27 * self.g3**2


def _exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def curve_from_j(j: Scalar) -> WeierstrassCurve:
    """The curve y^2 = 4x^3 - c x - c with c = 27 j / (j - 1728), whose j-invariant is j."""
    if _exact(j):
        j = Fraction(j)
        if j in (0, 1728):
            raise ExcludedJError(f"j = {j} is excluded; use a fixed reference curve")
        c = 27 * j / (j - 1728)
        return WeierstrassCurve(c, c)
    if j == 0 or j == 1728:
        raise ExcludedJError(f"j = {j} is excluded; use a fixed reference curve")
    c = 27 * j / (j - 1728)
    return WeierstrassCurve(c, c)


def j_invariant(curve: WeierstrassCurve) -> Scalar:
    g2, g3 = curve.g2, curve.g3
    if _exact(g2) and _exact(g3):
        g2, g3 = Fraction(g2), Fraction(g3)
    disc = g2**3 - 27 * g3**2
    if disc == 0:
        raise SingularCurveError("curve has zero discriminant")
    return 1728 * g2**3 / disc
