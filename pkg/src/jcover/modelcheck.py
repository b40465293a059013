"""Finite-level structures, quantifier-free types and the back-and-forth step.

An H-point is a pair (tau, label): a point of the upper half plane together
with a torsor label fixing its position in the level-N fibre.  Its Hecke
coordinates at a level M dividing N are

    x_g = j((g . lambda_M) tau)        g in Gamma \\ G_M,

where lambda_M is the label reduced mod M acting on cosets from the right
(:func:`jcover.fingal.coset_action`).  The pair (gamma tau, lambda gamma^-1)
describes the same point as (tau, lambda) for gamma in SL2(Z), so every
point is first rewritten relative to the reduced representative of tau; the
resulting *effective* label is what the SF check and the twist search use.
Special points are fixed by the theory: their labels are ignored and their
coordinates are computed with the identity label.

The level-N type of a tuple records, over all coordinates of all its points,
which coordinates are equal and which pairs satisfy Phi_M (M | N, M > 1),
together with each point's base j-value and discriminant (if special).
Equal and Phi relations coming out of certified numerics are three-valued;
anything undecided lands in ``indeterminate`` rather than being guessed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import mpmath

from .cm import class_number, get_class_polynomial
from .errors import LevelMismatchError, PrecisionError, PreconditionError
from .fingal import FiniteGroupElement, TorsorLabel, coset_action, group_elements, truncate
from .gl2q import GroupElement, coset_representatives, divisors, multiply
from .halfplane import ExactPoint, HalfPlanePoint, NumericPoint, apply, point_from_json, reduce_point, special_discriminant
from .jfun import evaluate_j_detailed
from .modpoly import get_modular_polynomial, phi_eval
from .numeric import GUARD_DIGITS, Approx, Tri, classify_zero, format_mp, is_exact, working_digits


@dataclass(frozen=True)
class HPoint:
    name: str
    tau: HalfPlanePoint
    label: TorsorLabel

    def to_json(self) -> dict:
        return {"name": self.name, "tau": self.tau.to_json(), "label": self.label.to_json()}

    @classmethod
    def from_json(cls, obj: dict, level: int) -> "HPoint":
        rows = [[int(x) for x in row] for row in obj["label"]]
        return cls(obj["name"], point_from_json(obj["tau"]), TorsorLabel.of(rows, level))


# ---------------------------------------------------------------------------
# atoms: coordinate values and the relations between them


@lru_cache(maxsize=None)
def _reduced(tau: HalfPlanePoint) -> tuple[HalfPlanePoint, GroupElement]:
    return reduce_point(tau)


@lru_cache(maxsize=None)
def coordinate_value(tau: HalfPlanePoint, g: GroupElement, digits: int):
    """j(g tau): an int when g tau is a CM point of class number one, else an Approx."""
    point = apply(g, tau)
    if isinstance(point, ExactPoint) and class_number(point.D) == 1:
        return -get_class_polynomial(point.D).coefficients[0]
    return evaluate_j_detailed(point, digits).approx()


@lru_cache(maxsize=None)
def _special(tau: HalfPlanePoint, bound: int) -> int | None:
    return special_discriminant(tau, bound)


def _radius(x: Approx) -> mpmath.mpf:
    # evaluation error plus a relative allowance for the working precision
    return x.radius + abs(x.value) * mpmath.mpf(10) ** (-GUARD_DIGITS)


@lru_cache(maxsize=None)
def values_equal(x, y) -> Tri:
    if is_exact(x) and is_exact(y):
        return Tri.of(x == y)
    xa = x if isinstance(x, Approx) else Approx.exact(x)
    ya = y if isinstance(y, Approx) else Approx.exact(y)
    with working_digits(30):
        return classify_zero(abs(xa.value - ya.value), _radius(xa) + _radius(ya))


@lru_cache(maxsize=None)
def values_related(x, y, m: int) -> Tri:
    """Phi_m(x, y) = 0 as a three-valued verdict."""
    poly = get_modular_polynomial(m)
    if is_exact(x) and is_exact(y):
        return Tri.of(phi_eval(poly, x, y) == 0)
    xa = x if isinstance(x, Approx) else Approx.exact(x)
    ya = y if isinstance(y, Approx) else Approx.exact(y)
    xa = Approx(xa.value, _radius(xa))
    ya = Approx(ya.value, _radius(ya))
    value = phi_eval(poly, xa, ya)
    with working_digits(30):
        return classify_zero(abs(value.value), value.radius)


# ---------------------------------------------------------------------------
# structures


@dataclass(frozen=True)
class FiniteLevelStructure:
    """A finite set of H-points at level N.

    ``digits`` is the accuracy of every j-value computed for the structure and
    ``discriminant_bound`` bounds the search that declares a numeric point
    special.
    """

    level: int
    points: tuple[HPoint, ...]
    digits: int = 30
    discriminant_bound: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        names = [p.name for p in self.points]
        if len(set(names)) != len(names):
            raise ValueError("point names must be distinct")
        for p in self.points:
            if p.label.level != self.level:
                raise LevelMismatchError(f"point {p.name} has a label of level {p.label.level}, not {self.level}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.points)

    def point(self, name: str) -> HPoint:
        for p in self.points:
            if p.name == name:
                return p
        raise KeyError(name)

    def with_point(self, p: HPoint) -> "FiniteLevelStructure":
        return FiniteLevelStructure(self.level, self.points + (p,), self.digits, self.discriminant_bound)

    def twisted(self, sigma: FiniteGroupElement) -> "FiniteLevelStructure":
        """Every label multiplied on the right by sigma."""
        pts = tuple(HPoint(p.name, p.tau, p.label.twist(sigma)) for p in self.points)
        return FiniteLevelStructure(self.level, pts, self.digits, self.discriminant_bound)

    def moved(self, gamma: GroupElement) -> "FiniteLevelStructure":
        """Every tau replaced by gamma tau (gamma in SL2(Z)), labels kept."""
        if gamma.level != 1:
            raise ValueError("gamma must lie in SL2(Z)")
        pts = tuple(HPoint(p.name, apply(gamma, p.tau), p.label) for p in self.points)
        return FiniteLevelStructure(self.level, pts, self.digits, self.discriminant_bound)

    def special(self, p: HPoint) -> int | None:
        return _special(p.tau, self.discriminant_bound)

    def base_value(self, p: HPoint):
        red, _ = _reduced(p.tau)
        return coordinate_value(red, GroupElement.identity(), self.digits)

    def effective(self, p: HPoint) -> tuple[HalfPlanePoint, TorsorLabel]:
        """(reduced tau, label relative to it); special points get the identity label."""
        red, gamma = _reduced(p.tau)
        if self.special(p) is not None:
            return red, TorsorLabel.identity(self.level)
        g = FiniteGroupElement.lift_of(gamma, self.level)
        return red, p.label.twist(g.inverse())

    def same_base(self, p: HPoint, q: HPoint) -> Tri:
        return values_equal(self.base_value(p), self.base_value(q))

    def sf_violations(self) -> list[tuple[str, str]]:
        """Pairs of non-special points with equal j-value but different effective labels."""
        out = []
        for p, q in combinations(self.points, 2):
            if self.special(p) is not None or self.special(q) is not None:
                continue
            if self.same_base(p, q) is Tri.FALSE:
                continue
            if self.effective(p)[1] != self.effective(q)[1]:
                out.append((p.name, q.name))
        return out

    def satisfies_sf(self) -> bool:
        return not self.sf_violations()

    def sf_identify(self) -> "FiniteLevelStructure":
        """Merge points that have equal j-value and equal effective label (first name wins)."""
        kept: list[HPoint] = []
        for p in self.points:
            duplicate = False
            for q in kept:
                if self.same_base(p, q) is Tri.TRUE:
                    special = self.special(p) is not None
                    if special or self.effective(p)[1] == self.effective(q)[1]:
                        duplicate = True
                        break
            if not duplicate:
                kept.append(p)
        return FiniteLevelStructure(self.level, tuple(kept), self.digits, self.discriminant_bound)

    def to_json(self) -> dict:
        out = []
        for p in self.points:
            entry = p.to_json()
            value = self.base_value(p)
            entry["j"] = _value_json(value, self.digits)
            d = self.special(p)
            if d is not None:
                entry["discriminant"] = str(d)
            out.append(entry)
        return {"level": self.level, "digits": self.digits, "points": out}


def _value_json(value, digits: int):
    if is_exact(value):
        return {"exact": str(value)}
    with working_digits(digits + GUARD_DIGITS):
        return {
            "re": format_mp(value.value.real, digits),
            "im": format_mp(value.value.imag, digits),
            "radius": mpmath.nstr(value.radius, 5, min_fixed=-math.inf, max_fixed=math.inf),
        }


# ---------------------------------------------------------------------------
# types


Coordinate = tuple[int, int, int]  # (point index, level M, representative index)


def coordinate_layout(n_points: int, level: int) -> tuple[Coordinate, ...]:
    return tuple(
        (i, m, k) for i in range(n_points) for m in divisors(level) for k in range(len(coset_representatives(m)))
    )


def _canonical_classes(parent: list[int]) -> tuple[int, ...]:
    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ids: dict[int, int] = {}
    return tuple(ids.setdefault(find(x), len(ids)) for x in range(len(parent)))


@dataclass(frozen=True, eq=False)
class FiniteLevelType:
    """The level-N relation pattern of a tuple of H-points.

    ``classes[c]`` is the equality class of coordinate ``coordinates[c]``
    (classes numbered by first occurrence), ``relations`` holds triples
    (c1, c2, M) with c1 < c2 and Phi_M(x_c1, x_c2) = 0, and ``indeterminate``
    holds the triples (M = 1 for equality) that could not be decided.
    Approximate base values compare equal when their balls overlap.
    """

    level: int
    special: tuple[int | None, ...]
    base: tuple
    coordinates: tuple[Coordinate, ...]
    classes: tuple[int, ...]
    relations: frozenset
    indeterminate: frozenset = field(default_factory=frozenset)

    __hash__ = None

    @property
    def determinate(self) -> bool:
        return not self.indeterminate

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteLevelType):
            return NotImplemented
        if (self.level, self.special, self.coordinates, self.classes) != (
            other.level,
            other.special,
            other.coordinates,
            other.classes,
        ):
            return False
        if self.relations != other.relations or self.indeterminate != other.indeterminate:
            return False
        return len(self.base) == len(other.base) and all(
            values_equal(a, b) is Tri.TRUE for a, b in zip(self.base, other.base)
        )

    def restrict(self, m: int) -> "FiniteLevelType":
        """The level-m type, m | N: forget coordinates and relations not visible at level m."""
        if self.level % m:
            raise LevelMismatchError(f"{m} does not divide {self.level}")
        keep = [c for c, (_, lev, _) in enumerate(self.coordinates) if m % lev == 0]
        index = {c: k for k, c in enumerate(keep)}
        ids: dict[int, int] = {}
        classes = tuple(ids.setdefault(self.classes[c], len(ids)) for c in keep)

        def project(triples):
            return frozenset(
                (index[a], index[b], lev) for a, b, lev in triples if a in index and b in index and m % lev == 0
            )

        return FiniteLevelType(
            m,
            self.special,
            self.base,
            tuple(self.coordinates[c] for c in keep),
            classes,
            project(self.relations),
            project(self.indeterminate),
        )


def _resolve(structure: FiniteLevelStructure, points: Iterable) -> list[HPoint]:
    return [p if isinstance(p, HPoint) else structure.point(p) for p in points]


def coordinate_values(structure: FiniteLevelStructure, p: HPoint, level: int) -> list:
    """The Hecke coordinates of p at ``level``, in representative order."""
    red, label = structure.effective(p)
    lam = truncate(label, level).element
    return [coordinate_value(red, coset_action(g, lam), structure.digits) for g in coset_representatives(level)]


def finite_type(structure: FiniteLevelStructure, points: Sequence, level: int | None = None) -> FiniteLevelType:
    n = structure.level if level is None else level
    if structure.level % n:
        raise LevelMismatchError(f"{n} does not divide the structure level {structure.level}")
    pts = _resolve(structure, points)
    layout = coordinate_layout(len(pts), n)
    per_point = {(i, m): coordinate_values(structure, p, m) for i, p in enumerate(pts) for m in divisors(n)}
    values = [per_point[i, m][k] for i, m, k in layout]
    parent = list(range(len(values)))
    relations = set()
    unknown = set()
    phi_levels = [m for m in divisors(n) if m > 1]
    for a, b in combinations(range(len(values)), 2):
        eq = values_equal(values[a], values[b])
        if eq is Tri.TRUE:
            ra, rb = a, b
            while parent[ra] != ra:
                ra = parent[ra]
            while parent[rb] != rb:
                rb = parent[rb]
            parent[max(ra, rb)] = min(ra, rb)
        elif eq is Tri.INDETERMINATE:
            unknown.add((a, b, 1))
        for m in phi_levels:
            rel = values_related(values[a], values[b], m)
            if rel is Tri.TRUE:
                relations.add((a, b, m))
            elif rel is Tri.INDETERMINATE:
                unknown.add((a, b, m))
    return FiniteLevelType(
        n,
        tuple(structure.special(p) for p in pts),
        tuple(structure.base_value(p) for p in pts),
        layout,
        _canonical_classes(parent),
        frozenset(relations),
        frozenset(unknown),
    )


# ---------------------------------------------------------------------------
# back and forth


def extend_partial_iso(
    source: FiniteLevelStructure,
    target: FiniteLevelStructure,
    partial: Mapping[str, str],
    new,
) -> tuple[HPoint, FiniteGroupElement] | None:
    """Find an image for ``new`` so that partial + {new -> image} preserves the type.

    The image is an existing target point or a fresh one over the same
    reduced tau.  For a non-special point the candidates are the twists
    label(new) . sigma, tried in the order: the twist already carried by a
    domain point over the same j-value, the twists that reach unused target
    points over the same j-value, the identity, then every element of
    PSL2(Z/N) in canonical order.  The returned sigma is the twist of the
    effective labels.  Raises PreconditionError if the partial map does not
    preserve the type of its domain.
    """
    if source.level != target.level:
        raise LevelMismatchError("structures have different levels")
    n = source.level
    x = new if isinstance(new, HPoint) else source.point(new)
    dom = _resolve(source, partial.keys())
    img = _resolve(target, partial.values())
    if finite_type(source, dom) != finite_type(target, img):
        raise PreconditionError("the partial map does not preserve the type of its domain")
    identity = FiniteGroupElement.identity(n)
    if x.name in partial:
        return target.point(partial[x.name]), identity
    goal = finite_type(source, dom + [x])

    def matches(y: HPoint) -> bool:
        return finite_type(target, img + [y]) == goal

    same_base = [q for q in target.points if target.same_base(q, x) is Tri.TRUE]
    if source.special(x) is not None:
        for y in same_base + [HPoint(_fresh_name(target, x.name), x.tau, TorsorLabel.identity(n))]:
            if matches(y):
                return y, identity
        return None

    red, lam = source.effective(x)
    used = set(partial.values())
    order: list[FiniteGroupElement] = []
    for d, e in zip(dom, img):
        if source.special(d) is None and source.same_base(d, x) is Tri.TRUE:
            order.append(source.effective(d)[1].element.inverse() @ target.effective(e)[1].element)
            break
    order.extend(sorted(lam.element.inverse() @ target.effective(q)[1].element for q in same_base if q.name not in used))
    order.append(identity)
    order.extend(group_elements(n))
    tried = set()
    for sigma in order:
        if sigma in tried:
            continue
        tried.add(sigma)
        want = lam.twist(sigma)
        y = next((q for q in same_base if q.name not in used and target.effective(q)[1] == want), None)
        if y is None:
            y = HPoint(_fresh_name(target, x.name), red, want)
        if matches(y):
            return y, sigma
    return None


def _fresh_name(structure: FiniteLevelStructure, name: str) -> str:
    while name in structure.names:
        name += "'"
    return name


@dataclass(frozen=True)
class BackAndForthStep:
    source: str
    image: str
    twist: FiniteGroupElement
    fresh: bool


def back_and_forth(
    source: FiniteLevelStructure, target: FiniteLevelStructure, names: Sequence[str] | None = None
) -> tuple[FiniteLevelStructure, dict[str, str], list[BackAndForthStep]]:
    """Extend the empty map over ``names`` (default: all source points) one point at a time.

    Fresh images are adjoined to the target; returns the enlarged target,
    the final map and the steps taken.  Raises PreconditionError if some
    point has no image.
    """
    partial: dict[str, str] = {}
    steps = []
    for name in names if names is not None else source.names:
        found = extend_partial_iso(source, target, partial, name)
        if found is None:
            raise PreconditionError(f"no type-preserving image for {name}")
        y, sigma = found
        fresh = y.name not in target.names
        if fresh:
            target = target.with_point(y)
        partial[name] = y.name
        steps.append(BackAndForthStep(name, y.name, sigma, fresh))
    return target, partial, steps


# ---------------------------------------------------------------------------
# witnesses and counts


def generic_point(digits: int = 30, seed: int = 0) -> NumericPoint:
    """A pseudo-random point of the fundamental domain, deterministic in ``seed``."""
    rng = random.Random(seed)
    prec = digits + 10
    with working_digits(prec):
        re = mpmath.mpf(rng.getrandbits(128)) / 2**128 - mpmath.mpf("0.5")
        im = 1 + mpmath.mpf(rng.getrandbits(128)) / 2**128
        return NumericPoint(re, im, prec)


def nonstandard_fiber_witness(level: int, digits: int = 30) -> FiniteLevelStructure:
    """Two points over one generic tau with labels identity and the least non-identity sigma."""
    if level < 2:
        raise ValueError("the witness needs level at least 2")
    tau = generic_point(digits)
    ident = TorsorLabel.identity(level)
    sigma = next(s for s in group_elements(level) if not s.is_identity())
    pts = (HPoint("t1", tau, ident), HPoint("t2", tau, TorsorLabel(sigma)))
    return FiniteLevelStructure(level, pts, digits)


def count_types_over_point(orbit: Sequence, level: int, acting: Sequence[FiniteGroupElement]) -> int:
    """Orbits of the subgroup generated by ``acting`` on the fibre over a point.

    ``orbit`` lists the level-N orbit values j(g tau) in representative order.
    A label lambda has shadow (orbit[g . lambda])_g; labels with the same
    shadow are indistinguishable, and the subgroup acts by right
    multiplication.  The result counts the classes of the generated
    equivalence.
    """
    reps = coset_representatives(level)
    if len(orbit) != len(reps):
        raise ValueError(f"expected {len(reps)} orbit values, got {len(orbit)}")
    for s in acting:
        if s.level != level:
            raise LevelMismatchError(f"acting element of level {s.level}, fibre of level {level}")
    # cluster equal values so shadows can be compared as tuples of ids
    ids: list[int] = []
    for k, v in enumerate(orbit):
        ids.append(next((ids[i] for i in range(k) if values_equal(orbit[i], v) is Tri.TRUE), k))
    index = {g: k for k, g in enumerate(reps)}
    labels = group_elements(level)
    pos = {lam: k for k, lam in enumerate(labels)}
    parent = list(range(len(labels)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    shadows: dict[tuple, int] = {}
    for k, lam in enumerate(labels):
        shadow = tuple(ids[index[coset_action(g, lam)]] for g in reps)
        union(k, shadows.setdefault(shadow, k))
        for s in acting:
            union(k, pos[lam @ s])
    return len({find(k) for k in range(len(labels))})


# ---------------------------------------------------------------------------
# Psi axioms


@dataclass(frozen=True)
class PsiReport:
    passed: bool
    samples: int
    pairs: int
    max_residual: mpmath.mpf
    bound: mpmath.mpf
    failures: tuple[str, ...] = ()


def certified_residual(g: GroupElement, h: GroupElement, tau: NumericPoint, digits: int) -> Approx:
    """Phi_M(j(g tau), j(h tau)) with M = level(g h^-1), as a ball of radius below 10^(-digits).

    The working precision is raised until the evaluation error is small
    enough; ``tau`` is treated as the exact binary number it stores.
    """
    poly = get_modular_polynomial(multiply(g, h.inverse()).level)
    bound = mpmath.mpf(10) ** (-digits)
    extra = 10
    while True:
        prec = digits + extra
        t = NumericPoint(tau.re, tau.im, prec + GUARD_DIGITS)
        x = evaluate_j_detailed(apply(g, t), prec).approx()
        y = evaluate_j_detailed(apply(h, t), prec).approx()
        value = phi_eval(poly, x, y)
        with working_digits(prec + GUARD_DIGITS):
            if value.radius < bound:
                return value
            if extra > 40 * (digits + 10):
                raise PrecisionError(f"could not certify Phi residual to {digits} digits")
            extra += max(10, int(mpmath.log10(value.radius / bound)) + 5)


def psi_axiom_check(gs: Sequence[GroupElement], samples: int = 5, digits: int = 30, seed: int = 0) -> PsiReport:
    """Check Phi_{level(g_i g_k^-1)}(j(g_i tau), j(g_k tau)) = 0 at random tau.

    Each residual must be below 10^(1 - digits); the j-values are computed
    with enough extra digits that the evaluation error itself stays under
    10^(-digits).
    """
    if not gs:
        raise ValueError("need at least one group element")
    rng = random.Random(seed)
    bound = mpmath.mpf(10) ** (1 - digits)
    worst = mpmath.mpf(0)
    failures = []
    pairs = list(combinations(range(len(gs)), 2))
    for s in range(samples):
        tau = generic_point(digits, rng.getrandbits(32))
        for i, k in pairs:
            value = certified_residual(gs[i], gs[k], tau, digits)
            with working_digits(digits + GUARD_DIGITS):
                residual = abs(value.value)
                worst = max(worst, residual)
                if residual >= bound:
                    failures.append(f"sample {s}, pair ({i}, {k}): residual {mpmath.nstr(residual, 5)}")
    return PsiReport(not failures, samples, len(pairs), worst, bound, tuple(failures))
