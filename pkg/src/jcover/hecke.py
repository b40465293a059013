"""Hecke orbits, the isogeny relation Phi_N(j1, j2) = 0, and independence tests.

Numeric zero tests return a :class:`~jcover.numeric.Tri`; an answer inside
the uncertainty band is INDETERMINATE and is never read as false.  The
independence predicates can only look at finitely many levels and
discriminants, so they return a :class:`Verdict` that carries those bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import mpmath

from .cm import is_cm_value
from .errors import IndeterminateError
from .gl2q import coset_representatives
from .halfplane import HalfPlanePoint, apply, special_discriminant
from .jfun import evaluate_j_detailed
from .modpoly import get_modular_polynomial, phi_eval
from .numeric import GUARD_DIGITS, Approx, Tri, classify_zero, is_exact, working_digits


def orbit_at_level(tau: HalfPlanePoint, n: int, digits: int = 30) -> list[mpmath.mpc]:
    """j(g tau) for the level-n coset representatives g, in representative order."""
    return [ev.value for ev in orbit_evaluations(tau, n, digits)]


def orbit_evaluations(tau: HalfPlanePoint, n: int, digits: int = 30):
    return [evaluate_j_detailed(apply(g, tau), digits) for g in coset_representatives(n)]


def ball(x) -> Approx:
    """x as an Approx.  Bare mpmath numbers are trusted to the current working precision."""
    if isinstance(x, Approx):
        return x
    if is_exact(x):
        return Approx.exact(x)
    x = mpmath.mpc(x)
    eps = mpmath.mpf(2) ** (4 - mpmath.mp.prec)
    return Approx(x, eps * (1 + abs(x)))


def phi_residual(j1, j2, n: int) -> Approx | int:
    """Phi_n(j1, j2): exact for exact inputs, otherwise a ball."""
    poly = get_modular_polynomial(n)
    if is_exact(j1) and is_exact(j2):
        return phi_eval(poly, j1, j2)
    return phi_eval(poly, ball(j1), ball(j2))


def related_at_level(j1, j2, n: int) -> Tri:
    """Whether Phi_n(j1, j2) = 0."""
    value = phi_residual(j1, j2, n)
    if not isinstance(value, Approx):
        return Tri.of(value == 0)
    with working_digits(30):
        return classify_zero(abs(value.value), value.radius)


def in_hecke_orbit(j1, j2, max_n: int) -> int | None:
    """Smallest n <= max_n with Phi_n(j1, j2) = 0, or None.

    Raises IndeterminateError as soon as a level cannot be decided, since a
    later positive answer would not be the smallest one.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    for n in range(1, max_n + 1):
        verdict = related_at_level(j1, j2, n)
        if verdict is Tri.INDETERMINATE:
            raise IndeterminateError(f"relation at level {n} is indeterminate")
        if verdict is Tri.TRUE:
            return n
    return None


@dataclass(frozen=True)
class Verdict:
    """A bounded independence verdict; ``reason`` names the witness when false."""

    holds: bool
    max_n: int
    discriminant_bound: int
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def _same_value(a, b) -> Tri:
    with working_digits(30):
        radius = a.error + b.error
        radius += (abs(a.value) + abs(b.value)) * mpmath.mpf(10) ** (-GUARD_DIGITS)
        return classify_zero(abs(a.value - b.value), radius)


def g_independent(
    taus: Sequence[HalfPlanePoint], max_n: int, digits: int = 30, discriminant_bound: int = 1000
) -> Verdict:
    """No tau is special and no two lie in the same G-orbit at a level <= max_n.

    Speciality of numeric points is a search over discriminants up to
    ``discriminant_bound``.  An undecidable comparison raises IndeterminateError.
    """
    for k, tau in enumerate(taus):
        d = special_discriminant(tau, discriminant_bound)
        if d is not None:
            return Verdict(False, max_n, discriminant_bound, f"point {k} is special with discriminant {d}")
    for (i, s), (k, t) in combinations(enumerate(taus), 2):
        base = evaluate_j_detailed(s, digits)
        for n in range(1, max_n + 1):
            for m, ev in enumerate(orbit_evaluations(t, n, digits)):
                verdict = _same_value(base, ev)
                if verdict is Tri.INDETERMINATE:
                    raise IndeterminateError(f"points {i} and {k}: comparison at level {n} is indeterminate")
                if verdict is Tri.TRUE:
                    g = coset_representatives(n)[m]
                    return Verdict(False, max_n, discriminant_bound, f"point {i} = {g!r} . point {k} up to Gamma")
    return Verdict(True, max_n, discriminant_bound)


def strongly_g_independent(js: Sequence, max_n: int, discriminant_bound: int = 100) -> Verdict:
    """No j is a CM value (|D| <= bound) and no pair satisfies Phi_n for n <= max_n."""
    for k, j in enumerate(js):
        d = is_cm_value(j, discriminant_bound)
        if d is not None:
            return Verdict(False, max_n, discriminant_bound, f"value {k} is a CM value of discriminant {d}")
    for (i, a), (k, b) in combinations(enumerate(js), 2):
        n = in_hecke_orbit(a, b, max_n)
        if n is not None:
            return Verdict(False, max_n, discriminant_bound, f"values {i} and {k} satisfy Phi_{n}")
    return Verdict(True, max_n, discriminant_bound)
