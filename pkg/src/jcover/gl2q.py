"""Arithmetic in G = GL2+(Q) modulo scalars.

Every element is stored as its canonical integer representative: a primitive
integer matrix with positive determinant whose first nonzero entry (reading
a, b, c, d) is positive.  The determinant of that representative is the
*level* of the element; the elements of level N form the double coset
Gamma diag(N, 1) Gamma with Gamma = SL2(Z).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Iterator, Sequence

from .errors import DeterminantSignError, NotInGammaError


@dataclass(frozen=True, order=True)
class GroupElement:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c <= 0:
            raise DeterminantSignError(f"determinant of {self.rows()} is not positive")
        if reduce(gcd, (self.a, self.b, self.c, self.d)) != 1:
            raise ValueError(f"{self.rows()} is not primitive; use normalize()")
        lead = next(x for x in (self.a, self.b, self.c, self.d) if x)
        if lead < 0:
            raise ValueError(f"{self.rows()} is not sign-normalized; use normalize()")

    @property
    def level(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1, 0, 0, 1)

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def adjugate(self) -> tuple[int, int, int, int]:
        return (self.d, -self.b, -self.c, self.a)

    def inverse(self) -> "GroupElement":
        return normalize_integer(*self.adjugate())

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)

    def to_json(self) -> list[list[str]]:
        return [[str(self.a), str(self.b)], [str(self.c), str(self.d)]]

    @classmethod
    def from_json(cls, rows) -> "GroupElement":
        return normalize(rows)

    def __repr__(self) -> str:
        return f"GroupElement([[{self.a}, {self.b}], [{self.c}, {self.d}]])"


def normalize_integer(a: int, b: int, c: int, d: int) -> GroupElement:
    if a * d - b * c <= 0:
        raise DeterminantSignError(f"determinant of [[{a}, {b}], [{c}, {d}]] is not positive")
    g = reduce(gcd, (a, b, c, d))
    a, b, c, d = a // g, b // g, c // g, d // g
    lead = next(x for x in (a, b, c, d) if x)
    if lead < 0:
        a, b, c, d = -a, -b, -c, -d
    return GroupElement(a, b, c, d)


def normalize(matrix) -> GroupElement:
    """Canonical representative of a rational 2x2 matrix with positive determinant.

    ``matrix`` is a pair of rows; entries may be ints, Fractions or strings
    such as ``"-3/4"``.  Matrices that differ by a nonzero rational scalar
    give the same result.
    """
    (a, b), (c, d) = matrix
    entries = [Fraction(x) for x in (a, b, c, d)]
    denom = reduce(lambda x, y: x * y // gcd(x, y), (e.denominator for e in entries), 1)
    ints = [int(e * denom) for e in entries]
    return normalize_integer(*ints)


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    return normalize_integer(
        g.a * h.a + g.b * h.c,
        g.a * h.b + g.b * h.d,
        g.c * h.a + g.d * h.c,
        g.c * h.b + g.d * h.d,
    )


def prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def psi(n: int) -> int:
    """Dedekind psi: n * prod_{p | n} (1 + 1/p)."""
    if n < 1:
        raise ValueError("psi is defined for positive integers")
    out = n
    for p in prime_factors(n):
        out = out // p * (p + 1)
    return out


def _egcd(x: int, y: int) -> tuple[int, int, int]:
    s0, s1, t0, t1 = 1, 0, 0, 1
    while y:
        q, r = divmod(x, y)
        x, y = y, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return x, s0, t0


def hermite_form(g: GroupElement) -> GroupElement:
    """Canonical representative [[a, b], [0, d]] of the left coset Gamma g.

    a, d > 0 with ad = level(g) and 0 <= b < d.
    """
    a, b, c, d = g.a, g.b, g.c, g.d
    g0, x, y = _egcd(a, c)
    if g0 < 0:
        g0, x, y = -g0, -x, -y
    # [[x, y], [-c/g0, a/g0]] lies in SL2(Z) and kills the lower-left entry
    top_b = x * b + y * d
    bottom_d = (a * d - b * c) // g0
    return GroupElement(g0, top_b % bottom_d, 0, bottom_d)


@dataclass(frozen=True)
class CosetSystem:
    """The psi(N) Hermite representatives of Gamma \\ G_N, sorted by (a, b)."""

    level: int
    representatives: tuple[GroupElement, ...]

    def __len__(self) -> int:
        return len(self.representatives)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.representatives)

    def __getitem__(self, i: int) -> GroupElement:
        return self.representatives[i]

    def index(self, g: GroupElement) -> int:
        """Position of the coset Gamma g among the representatives."""
        if g.level != self.level:
            raise ValueError(f"element of level {g.level} in a level-{self.level} coset system")
        return _coset_index(self.level)[hermite_form(g)]


@lru_cache(maxsize=None)
def coset_representatives(n: int) -> CosetSystem:
    if n < 1:
        raise ValueError("level must be a positive integer")
    reps = []
    for a in divisors(n):
        d = n // a
        for b in range(d):
            if reduce(gcd, (a, b, d)) == 1:
                reps.append(GroupElement(a, b, 0, d))
    reps.sort(key=lambda g: (g.a, g.b))
    return CosetSystem(n, tuple(reps))


@lru_cache(maxsize=None)
def _coset_index(n: int) -> dict[GroupElement, int]:
    return {g: i for i, g in enumerate(coset_representatives(n))}


def same_left_coset(g: GroupElement, h: GroupElement) -> bool:
    """True iff Gamma g = Gamma h, i.e. g h^-1 is a scalar multiple of an element of SL2(Z)."""
    if g.level != h.level:
        return False
    a, b, c, d = h.adjugate()
    prod = normalize_integer(
        g.a * a + g.b * c, g.a * b + g.b * d, g.c * a + g.d * c, g.c * b + g.d * d
    )
    return prod.level == 1


def principal_congruence_member(g: GroupElement, n: int) -> bool:
    """Membership of g in Gamma(N), up to the sign ambiguity of PSL2(Z)."""
    if g.level != 1:
        raise NotInGammaError(f"{g!r} has level {g.level}, not 1")
    for s in (1, -1):
        if (s * g.a - 1) % n == 0 and (s * g.d - 1) % n == 0 and g.b % n == 0 and g.c % n == 0:
            return True
    return False


S = GroupElement(0, 1, -1, 0)  # canonical form of [[0, -1], [1, 0]]
T = GroupElement(1, 1, 0, 1)


def stabilizer_index(gs: Sequence[GroupElement]) -> int:
    """Index of Gamma_g = cap_i g_i^-1 Gamma g_i in Gamma.

    Gamma acts on tuples of cosets (Gamma g_1, ..., Gamma g_n) from the right;
    the stabilizer of the tuple is Gamma_g, so the index is the orbit length.
    """
    if not gs:
        raise ValueError("need at least one group element")
    start = tuple(hermite_form(g) for g in gs)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for state in frontier:
            for gen in (S, T):
                image = tuple(hermite_form(multiply(x, gen)) for x in state)
                if image not in seen:
                    seen.add(image)
                    nxt.append(image)
        frontier = nxt
    return len(seen)


def random_gamma(rng: random.Random, length: int = 6, shift: int = 3) -> GroupElement:
    """A random element of SL2(Z) (mod sign) as a word in S and powers of T."""
    g = GroupElement.identity()
    for _ in range(length):
        k = rng.randint(-shift, shift)
        g = multiply(g, GroupElement(1, k, 0, 1) if k else GroupElement.identity())
        if rng.random() < 0.7:
            g = multiply(g, S)
    return g
