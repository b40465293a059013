import random

import mpmath
import pytest
from hypothesis import given, strategies as st

from jcover import gl2q, halfplane
from jcover.errors import AmbiguousFixpointError
from jcover.gl2q import GroupElement, normalize
from jcover.halfplane import ExactPoint, NumericPoint, apply, fixed_point, is_special, reduce_point

I = ExactPoint.imaginary(1)


def close(z, w, digits=25):
    with mpmath.workdps(digits + 10):
        return abs(mpmath.mpc(z) - mpmath.mpc(w)) < mpmath.mpf(10) ** -digits


class TestApply:
    def test_identity(self):
        assert apply(GroupElement.identity(), I) == I

    def test_translation(self):
        assert apply(gl2q.T, I) == ExactPoint.from_form(1, -2, 2)  # 1 + i

    def test_inversion(self):
        image = apply(gl2q.S, ExactPoint.imaginary(2))
        assert image == ExactPoint.imaginary("1/2")

    @given(st.integers(0, 10**6))
    def test_exact_matches_numeric(self, seed):
        rng = random.Random(seed)
        g = gl2q.multiply(gl2q.random_gamma(rng), GroupElement(1, rng.randint(0, 2), 0, rng.randint(1, 3)))
        tau = ExactPoint.from_form(2, 1, 3)
        with mpmath.workdps(50):
            z = tau.complex()
            direct = (g.a * z + g.b) / (g.c * z + g.d)
            assert close(apply(g, tau).complex(), direct, 40)

    @given(st.integers(0, 10**6))
    def test_action_is_compatible_with_product(self, seed):
        rng = random.Random(seed)
        g, h = gl2q.random_gamma(rng), gl2q.random_gamma(rng)
        h = gl2q.multiply(h, GroupElement(2, 1, 0, 1))
        tau = ExactPoint.from_form(1, 1, 6)
        assert apply(gl2q.multiply(g, h), tau) == apply(g, apply(h, tau))


class TestFixedPoint:
    def test_order_two(self):
        assert fixed_point(gl2q.S) == I

    def test_parabolic(self):
        assert fixed_point(gl2q.T) is None

    def test_hyperbolic(self):
        assert fixed_point(GroupElement(2, 0, 0, 1)) is None

    def test_identity(self):
        with pytest.raises(AmbiguousFixpointError):
            fixed_point(GroupElement.identity())

    def test_is_special(self):
        assert is_special(gl2q.S)
        assert not is_special(GroupElement.identity())
        assert not is_special(gl2q.T)

    @given(st.tuples(*[st.integers(-8, 8)] * 4))
    def test_fixed_point_is_fixed(self, entries):
        a, b, c, d = entries
        if a * d - b * c <= 0:
            return
        g = normalize([[a, b], [c, d]])
        if g.is_identity() or not is_special(g):
            return
        p = fixed_point(g)
        assert apply(g, p) == p


class TestReduce:
    @given(st.integers(0, 10**6))
    def test_exact_reduction(self, seed):
        rng = random.Random(seed)
        tau = ExactPoint.from_form(2, -1, 3)
        moved = apply(gl2q.random_gamma(rng, length=8), tau)
        red, gamma = reduce_point(moved)
        assert halfplane.is_reduced(red)
        assert apply(gamma, moved) == red
        assert red == reduce_point(tau)[0]

    def test_boundary_normalized(self):
        red, _ = reduce_point(ExactPoint.from_form(1, -1, 1))
        assert red == ExactPoint.from_form(1, 1, 1)

    @given(st.integers(0, 10**6))
    def test_numeric_reduction(self, seed):
        rng = random.Random(seed)
        with mpmath.workdps(40):
            tau = NumericPoint.from_complex(mpmath.mpc(rng.uniform(-3, 3), rng.uniform(0.05, 2)), 30)
        red, gamma = reduce_point(tau)
        assert halfplane.is_reduced(red)
        assert close(apply(gamma, tau).complex(), red.complex(), 20)


class TestSpecialDiscriminant:
    def test_exact(self):
        assert halfplane.special_discriminant(ExactPoint.from_form(2, 1, 3), 10) == -23

    def test_numeric_cm_point(self):
        with mpmath.workdps(40):
            z = (1 + mpmath.sqrt(-7)) / 2 + 3
        tau = NumericPoint.from_complex(z, 30)
        assert halfplane.special_discriminant(tau, 100) == -7

    def test_generic(self):
        with mpmath.workdps(40):
            tau = NumericPoint.from_complex(mpmath.mpc(mpmath.e / 10, mpmath.pi / 2), 30)
        assert halfplane.special_discriminant(tau, 1000) is None


def test_json_round_trip():
    for tau in (ExactPoint.from_form(2, 1, 3), NumericPoint.from_strings("0.125", "1.5", 20)):
        assert halfplane.point_from_json(tau.to_json()) == tau
