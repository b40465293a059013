"""The invariant suite behind ``jcover verify``.

Each check returns a :class:`CheckResult`; ``quick`` shrinks the ranges so
the whole suite runs in well under a minute with a warm polynomial cache.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Callable, Iterator

import mpmath

from . import cm, fingal, gl2q, halfplane, jfun, modelcheck, modpoly
from .errors import ExcludedJError
from .numeric import working_digits


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def brute_force_cosets(n: int, bound: int) -> set[gl2q.GroupElement]:
    """Hermite forms of every primitive determinant-n matrix with entries in [-bound, bound]."""
    found = set()
    rng = range(-bound, bound + 1)
    for a, b, c in itertools.product(rng, repeat=3):
        if a:
            q, r = divmod(n + b * c, a)
            ds = [q] if r == 0 and abs(q) <= bound else []
        else:
            ds = list(rng) if -b * c == n else []
        for d in ds:
            if reduce(gcd, (a, b, c, d)) == 1:
                found.add(gl2q.hermite_form(gl2q.normalize_integer(a, b, c, d)))
    return found


def check_cosets(quick: bool) -> CheckResult:
    top = 20 if quick else 50
    for n in range(1, top + 1):
        if len(gl2q.coset_representatives(n)) != gl2q.psi(n):
            return CheckResult("cosets", False, f"wrong count at N={n}")
    brute = 6 if quick else 12
    for n in range(1, brute + 1):
        reps = set(gl2q.coset_representatives(n))
        if not brute_force_cosets(n, n + 1) <= reps:
            return CheckResult("cosets", False, f"brute force finds an extra coset at N={n}")
    return CheckResult("cosets", True, f"psi(N) for N <= {top}, brute force for N <= {brute}")


def check_modular_polynomials(quick: bool) -> CheckResult:
    rng = random.Random(2)
    digits = 60
    for n in (2, 3):
        poly = modpoly.get_modular_polynomial(n)
        if not (poly.is_symmetric() and poly.is_monic_x() and poly.degree_x == gl2q.psi(n)):
            return CheckResult("modpoly", False, f"Phi_{n} fails symmetry or monicity")
        if not modpoly.kronecker_check(n, poly):
            return CheckResult("modpoly", False, f"Phi_{n} fails the Kronecker congruence")
        ident = gl2q.GroupElement.identity()
        for _ in range(2 if quick else 5):
            tau = modelcheck.generic_point(digits, rng.getrandbits(32))
            for g in gl2q.coset_representatives(n):
                r = modelcheck.certified_residual(ident, g, tau, digits)
                with working_digits(digits):
                    if abs(r.value) >= mpmath.mpf(10) ** (1 - digits):
                        return CheckResult("modpoly", False, f"Phi_{n} residual too large at {g!r}")
    if modpoly.phi_eval(modpoly.get_modular_polynomial(2), 1728, 287496) != 0:
        return CheckResult("modpoly", False, "Phi_2(1728, 287496) != 0")
    return CheckResult("modpoly", True, "Phi_2, Phi_3 symmetric, monic, Kronecker, vanishing on orbits")


def check_j(quick: bool) -> CheckResult:
    with working_digits(60):
        tol = mpmath.mpf(10) ** -48
        if abs(jfun.evaluate_j(halfplane.ExactPoint.imaginary(1), 50) - 1728) > tol:
            return CheckResult("j", False, "j(i) != 1728")
        if abs(jfun.evaluate_j(halfplane.ExactPoint(1, 1, -3), 50)) > tol:
            return CheckResult("j", False, "j(rho) != 0")
        rng = random.Random(3)
        for _ in range(10 if quick else 50):
            tau = modelcheck.generic_point(60, rng.getrandbits(32))
            gamma = gl2q.random_gamma(rng)
            moved = halfplane.apply(gamma, halfplane.NumericPoint(tau.re, tau.im, 120))
            if abs(jfun.evaluate_j(moved, 50) - jfun.evaluate_j(tau, 50)) > tol:
                return CheckResult("j", False, f"Gamma-invariance fails for {gamma!r}")
    return CheckResult("j", True, "special values and Gamma-invariance at 50 digits")


def check_class_polynomials(quick: bool) -> CheckResult:
    expected = {-3: (0, 1), -4: (-1728, 1), -7: (3375, 1)}
    for d, coeffs in expected.items():
        if cm.get_class_polynomial(d).coefficients != coeffs:
            return CheckResult("classpoly", False, f"H_{d} is wrong")
    h = cm.class_polynomial(-23)
    if h.degree != 3 or h != cm.class_polynomial(-23, 2 * cm.default_digits(-23)):
        return CheckResult("classpoly", False, "H_-23 unstable")
    return CheckResult("classpoly", True, "H_-3, H_-4, H_-7 exact, H_-23 stable")


def check_finite_groups(quick: bool) -> CheckResult:
    top = 7 if quick else 13
    for n in range(2, top + 1):
        if len(fingal.group_elements(n)) != fingal.group_order(n):
            return CheckResult("fingal", False, f"|PSL2(Z/{n})| mismatch")
    for n in range(1, (6 if quick else 10) + 1):
        k = gl2q.psi(n)
        if len(fingal.cyclic_subgroups(n)) != k or modpoly.get_modular_polynomial(n).degree_x != k:
            return CheckResult("fingal", False, f"four-way count mismatch at N={n}")
        bij = fingal.subgroup_coset_bijection(n)
        if len(bij.to_coset) != k or set(bij.to_subgroup) != set(gl2q.coset_representatives(n)):
            return CheckResult("fingal", False, f"not a bijection at N={n}")
    return CheckResult("fingal", True, f"orders for N <= {top}, counts and bijections")


def check_stabilizer_index(quick: bool) -> CheckResult:
    for n in (2, 3, 4, 5):
        gs = [gl2q.GroupElement.identity(), *gl2q.coset_representatives(n)]
        if gl2q.stabilizer_index(gs) != fingal.group_order(n):
            return CheckResult("stabilizer", False, f"index mismatch at N={n}")
    return CheckResult("stabilizer", True, "[Gamma : Gamma_g] = |PSL2(Z/N)| for N = 2..5")


def demo_structure(level: int, digits: int = 30) -> modelcheck.FiniteLevelStructure:
    """Two generic points and the special point i, all with identity labels."""
    ident = fingal.TorsorLabel.identity(level)
    pts = (
        modelcheck.HPoint("p1", modelcheck.generic_point(digits, 1), ident),
        modelcheck.HPoint("p2", modelcheck.generic_point(digits, 2), ident),
        modelcheck.HPoint("s", halfplane.ExactPoint.imaginary(1), ident),
    )
    return modelcheck.FiniteLevelStructure(level, pts, digits)


def check_back_and_forth(quick: bool) -> CheckResult:
    for n in (2,) if quick else (2, 3, 4):
        source = demo_structure(n)
        for sigma in fingal.group_elements(n):
            target = source.twisted(sigma)
            final, partial, _ = modelcheck.back_and_forth(source, target)
            lhs = modelcheck.finite_type(source, source.names)
            rhs = modelcheck.finite_type(final, [partial[x] for x in source.names])
            if lhs != rhs:
                return CheckResult("backforth", False, f"type not preserved at N={n}")
        if modelcheck.nonstandard_fiber_witness(n).satisfies_sf():
            return CheckResult("backforth", False, f"SF witness not flagged at N={n}")
    return CheckResult("backforth", True, "extension over all twists, SF witnesses flagged")


def check_round_trip(quick: bool) -> CheckResult:
    rng = random.Random(4)
    count = 0
    while count < (20 if quick else 100):
        j = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**4))
        if j in (0, 1728):
            continue
        if jfun.j_invariant(jfun.curve_from_j(j)) != j:
            return CheckResult("curves", False, f"round trip fails at j = {j}")
        count += 1
    for bad in (0, 1728):
        try:
            jfun.curve_from_j(bad)
        except ExcludedJError:
            continue
        return CheckResult("curves", False, f"j = {bad} not rejected")
    return CheckResult("curves", True, "j_invariant(curve_from_j(j)) = j")


CHECKS: tuple[Callable[[bool], CheckResult], ...] = (
    check_cosets,
    check_modular_polynomials,
    check_j,
    check_class_polynomials,
    check_finite_groups,
    check_stabilizer_index,
    check_back_and_forth,
    check_round_trip,
)


def run(quick: bool = False) -> Iterator[CheckResult]:
    for check in CHECKS:
        yield check(quick)
