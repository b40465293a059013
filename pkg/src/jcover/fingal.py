"""Finite-level Galois and torsor combinatorics.

PSL2(Z/N) and PGL2(Z/N) are represented by matrices over Z/N in a canonical
form (the least lexicographic lift over the scalars being quotiented out).
The level-N cosets Gamma \\ G_N correspond to the cyclic subgroups of order N
in (Z/N)^2 via g |-> ker(g mod N), the column span of adj(g) mod N; through
this bijection PSL2(Z/N) acts on cosets from the right, and for an integer
lift gamma of sigma that action agrees with Gamma g |-> Gamma g gamma.

Fibres of the level-N cover are free transitive PSL2(Z/N)-sets.  A
:class:`TorsorLabel` names a fibre point relative to a base point; the
Galois twist multiplies labels on the right and the deck action on the left,
so the two commute.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union

from .errors import LevelMismatchError
from .gl2q import GroupElement, coset_representatives, hermite_form, prime_factors


class Flavor(enum.Enum):
    PSL = "psl"
    PGL = "pgl"


def units(n: int) -> list[int]:
    if n == 1:
        return [0]
    return [u for u in range(1, n) if math.gcd(u, n) == 1]


@dataclass(frozen=True, order=True)
class FiniteGroupElement:
    """Canonical matrix [[a, b], [c, d]] over Z/N.

    Construct through :meth:`of`, which reduces the entries and picks the
    least lexicographic lift among the scalar multiples being identified
    (+-1 for PSL, all units for PGL).
    """

    level: int
    a: int
    b: int
    c: int
    d: int
    flavor: Flavor = Flavor.PSL

    @classmethod
    def of(cls, entries, level: int, flavor: Flavor = Flavor.PSL) -> "FiniteGroupElement":
        if level < 1:
            raise ValueError("level must be a positive integer")
        if len(entries) == 2:
            (a, b), (c, d) = entries
        else:
            a, b, c, d = entries
        n = level
        t = (a % n, b % n, c % n, d % n)
        det = (t[0] * t[3] - t[1] * t[2]) % n
        if flavor is Flavor.PSL:
            if det != 1 % n:
                raise ValueError(f"determinant {det} is not 1 mod {n}")
            scalars = (1, n - 1)
        else:
            if math.gcd(det, n) != 1:
                raise ValueError(f"determinant {det} is not a unit mod {n}")
            scalars = units(n)
        best = min(tuple(s * x % n for x in t) for s in scalars)
        return cls(n, *best, flavor)

    @classmethod
    def identity(cls, level: int, flavor: Flavor = Flavor.PSL) -> "FiniteGroupElement":
        return cls.of((1, 0, 0, 1), level, flavor)

    @classmethod
    def lift_of(cls, g: GroupElement, level: int) -> "FiniteGroupElement":
        """Reduction of an element of SL2(Z) (level 1) modulo ``level``."""
        if g.level != 1:
            raise ValueError(f"{g!r} is not in SL2(Z)")
        return cls.of((g.a, g.b, g.c, g.d), level)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def _check(self, other: "FiniteGroupElement") -> None:
        if self.level != other.level:
            raise LevelMismatchError(f"levels {self.level} and {other.level} differ")
        if self.flavor is not other.flavor:
            raise ValueError("cannot combine PSL and PGL elements")

    def __matmul__(self, other: "FiniteGroupElement") -> "FiniteGroupElement":
        self._check(other)
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return FiniteGroupElement.of((a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h), self.level, self.flavor)

    def inverse(self) -> "FiniteGroupElement":
        n = self.level
        det_inv = pow((self.a * self.d - self.b * self.c) % n, -1, n) if n > 1 else 0
        return FiniteGroupElement.of(
            (self.d * det_inv, -self.b * det_inv, -self.c * det_inv, self.a * det_inv), n, self.flavor
        )

    def is_identity(self) -> bool:
        return self == FiniteGroupElement.identity(self.level, self.flavor)

    def apply_vector(self, v: tuple[int, int]) -> tuple[int, int]:
        n = self.level
        return ((self.a * v[0] + self.b * v[1]) % n, (self.c * v[0] + self.d * v[1]) % n)

    def reduce(self, level: int) -> "FiniteGroupElement":
        if self.level % level:
            raise LevelMismatchError(f"{level} does not divide {self.level}")
        return FiniteGroupElement.of(self.entries, level, self.flavor)

    def to_json(self) -> list[list[str]]:
        return [[str(self.a), str(self.b)], [str(self.c), str(self.d)]]

    def __repr__(self) -> str:
        return f"FiniteGroupElement([[{self.a}, {self.b}], [{self.c}, {self.d}]] mod {self.level}, {self.flavor.value})"


@lru_cache(maxsize=None)
def _group_elements(n: int, flavor: Flavor) -> tuple[FiniteGroupElement, ...]:
    seen = set()
    for t in itertools.product(range(n), repeat=4):
        det = (t[0] * t[3] - t[1] * t[2]) % n
        if flavor is Flavor.PSL and det != 1 % n:
            continue
        if flavor is Flavor.PGL and math.gcd(det, n) != 1:
            continue
        seen.add(FiniteGroupElement.of(t, n, flavor))
    return tuple(sorted(seen))


def group_elements(n: int, flavor: Flavor | str = Flavor.PSL) -> tuple[FiniteGroupElement, ...]:
    """Every element of PSL2(Z/N) or PGL2(Z/N), sorted by canonical entries."""
    if n < 1:
        raise ValueError("level must be a positive integer")
    return _group_elements(n, Flavor(flavor))


def group_order(n: int, flavor: Flavor | str = Flavor.PSL) -> int:
    """Closed-form order of PSL2(Z/N) or PGL2(Z/N)."""
    flavor = Flavor(flavor)
    if n < 1:
        raise ValueError("level must be a positive integer")
    sl = n**3
    for p in prime_factors(n):
        sl = sl // (p * p) * (p * p - 1)
    if flavor is Flavor.PSL:
        return sl // 2 if n > 2 else sl
    # |PGL| = |GL| / |units| = |SL| since det: GL -> units is onto
    return sl


@dataclass(frozen=True, order=True)
class CyclicSubgroup:
    """An order-N cyclic subgroup of (Z/N)^2, kept as its least generator."""

    level: int
    u: int
    v: int

    @classmethod
    def generated_by(cls, u: int, v: int, level: int) -> "CyclicSubgroup":
        n = level
        u, v = u % n, v % n
        if math.gcd(math.gcd(u, v), n) != 1:
            raise ValueError(f"({u}, {v}) does not have order {n}")
        best = min((k * u % n, k * v % n) for k in units(n))
        return cls(n, *best)

    @property
    def generator(self) -> tuple[int, int]:
        return (self.u, self.v)

    def elements(self) -> frozenset[tuple[int, int]]:
        n = self.level
        return frozenset((k * self.u % n, k * self.v % n) for k in range(n))


@lru_cache(maxsize=None)
def cyclic_subgroups(n: int) -> tuple[CyclicSubgroup, ...]:
    if n < 1:
        raise ValueError("level must be a positive integer")
    found = set()
    for u in range(n):
        for v in range(n):
            if math.gcd(math.gcd(u, v), n) == 1:
                found.add(CyclicSubgroup.generated_by(u, v, n))
    return tuple(sorted(found))


def act_on_subgroups(sigma: FiniteGroupElement, c: CyclicSubgroup) -> CyclicSubgroup:
    if sigma.level != c.level:
        raise LevelMismatchError(f"element of level {sigma.level} on a subgroup of level {c.level}")
    return CyclicSubgroup.generated_by(*sigma.apply_vector(c.generator), c.level)


def kernel_subgroup(g: GroupElement) -> CyclicSubgroup:
    """ker(g mod N) on column vectors, N = level(g); equals adj(g) Z^2 / N Z^2."""
    n = g.level
    p, q, r, s = g.adjugate()
    for x in range(n):
        for y in range(n):
            u, v = (p * x + q * y) % n, (r * x + s * y) % n
            if math.gcd(math.gcd(u, v), n) == 1:
                return CyclicSubgroup.generated_by(u, v, n)
    raise AssertionError("adjugate span has no element of full order")


@dataclass(frozen=True)
class CosetBijection:
    level: int
    to_coset: Mapping[CyclicSubgroup, GroupElement]
    to_subgroup: Mapping[GroupElement, CyclicSubgroup]

    def __len__(self) -> int:
        return len(self.to_coset)


@lru_cache(maxsize=None)
def subgroup_coset_bijection(n: int) -> CosetBijection:
    to_subgroup = {g: kernel_subgroup(g) for g in coset_representatives(n)}
    to_coset = {c: g for g, c in to_subgroup.items()}
    if len(to_coset) != len(to_subgroup):
        raise AssertionError(f"kernel map is not injective at level {n}")
    return CosetBijection(n, to_coset, to_subgroup)


def coset_action(g: GroupElement, sigma: FiniteGroupElement) -> GroupElement:
    """Right action of PSL2(Z/N) on the level-N Hermite representatives."""
    n = g.level
    if sigma.level != n:
        raise LevelMismatchError(f"element of level {sigma.level} on a coset of level {n}")
    if n == 1:
        return g
    bij = subgroup_coset_bijection(n)
    c = bij.to_subgroup[hermite_form(g)]
    return bij.to_coset[act_on_subgroups(sigma.inverse(), c)]


@dataclass(frozen=True, order=True)
class TorsorLabel:
    """A fibre point at level N, named by an element of PSL2(Z/N)."""

    element: FiniteGroupElement

    def __post_init__(self):
        if self.element.flavor is not Flavor.PSL:
            raise ValueError("torsor labels live in PSL2(Z/N)")

    @classmethod
    def identity(cls, level: int) -> "TorsorLabel":
        return cls(FiniteGroupElement.identity(level))

    @classmethod
    def of(cls, entries, level: int) -> "TorsorLabel":
        return cls(FiniteGroupElement.of(entries, level))

    @property
    def level(self) -> int:
        return self.element.level

    def twist(self, sigma: FiniteGroupElement) -> "TorsorLabel":
        """Galois action: right multiplication."""
        return TorsorLabel(self.element @ sigma)

    def deck(self, gamma: FiniteGroupElement) -> "TorsorLabel":
        """Covering-group action: left multiplication."""
        return TorsorLabel(gamma @ self.element)

    def relative_to(self, other: "TorsorLabel") -> FiniteGroupElement:
        """The sigma with other.twist(sigma) == self."""
        return other.element.inverse() @ self.element

    def to_json(self) -> list[list[str]]:
        return self.element.to_json()


Truncatable = Union[TorsorLabel, FiniteGroupElement]


def truncate(label: Truncatable, n: int) -> Truncatable:
    """Reduce a label (or group element) to level ``n``, which must divide its level."""
    if n < 1 or label.level % n:
        raise LevelMismatchError(f"{n} does not divide {label.level}")
    if isinstance(label, TorsorLabel):
        return TorsorLabel(label.element.reduce(n))
    return label.reduce(n)


def _act_key(key, sigma: FiniteGroupElement):
    if isinstance(key, TorsorLabel):
        if key.level != sigma.level:
            raise LevelMismatchError(f"label of level {key.level}, twist of level {sigma.level}")
        return key.twist(sigma)
    if isinstance(key, GroupElement):
        return coset_action(key, sigma)
    raise TypeError(f"cannot twist a fibre key of type {type(key).__name__}")


def galois_shadow(sigma: FiniteGroupElement, fiber: Mapping[Hashable, object]) -> dict:
    """The relabelled fibre k |-> fiber[k . sigma].

    Keys are TorsorLabels or level-N coset representatives.  Shadows compose
    as shadow(s s') = shadow(s) o shadow(s').
    """
    return {k: fiber[_act_key(k, sigma)] for k in fiber}


def orbits(points: Iterable[Hashable], generators: Sequence[Callable[[Hashable], Hashable]]) -> list[frozenset]:
    """Orbits of the group generated by ``generators`` (permutations of ``points``)."""
    remaining = set(points)
    out = []
    while remaining:
        start = min(remaining) if _sortable(remaining) else next(iter(remaining))
        orbit = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for gen in generators:
                y = gen(x)
                if y not in orbit:
                    orbit.add(y)
                    stack.append(y)
        remaining -= orbit
        out.append(frozenset(orbit))
    return out


def _sortable(items) -> bool:
    try:
        min(items)
        return True
    except TypeError:
        return False
