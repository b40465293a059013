import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from jcover import gl2q, jfun
from jcover.errors import ExcludedJError, SingularCurveError
from jcover.halfplane import ExactPoint, NumericPoint, apply


def sigma(k, n):
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def j_oracle(count):
    """c(-1..count-2) of 1728 E4^3 / (E4^3 - E6^2), by plain power series arithmetic."""
    m = count + 1
    e4 = [1] + [240 * sigma(3, n) for n in range(1, m)]
    e6 = [1] + [-504 * sigma(5, n) for n in range(1, m)]

    def mul(f, g):
        return [sum(f[i] * g[k - i] for i in range(k + 1)) for k in range(m)]

    e4c = mul(mul(e4, e4), e4)
    delta = [x - y for x, y in zip(e4c, mul(e6, e6))]  # 1728 q - ...
    # divide 1728 * e4c by delta / q
    den = [Fraction(x, 1728) for x in delta[1:]] + [Fraction(0)]
    out = []
    rem = [Fraction(x) for x in e4c]
    for k in range(m - 1):
        c = rem[k] / den[0]
        out.append(c)
        for i in range(m - k):
            if k + i < m:
                rem[k + i] -= c * den[i]
    return [int(c) for c in out]


class TestCoefficients:
    def test_leading(self):
        s = jfun.j_coefficients(2)
        assert (s[-1], s[0], s[1], s[2]) == (1, 744, 196884, 21493760)

    def test_against_eisenstein_oracle(self):
        oracle = j_oracle(40)
        s = jfun.j_coefficients(len(oracle) - 2)
        assert [s[n] for n in range(-1, len(oracle) - 1)] == oracle

    def test_tail_majorant(self):
        s = jfun.j_coefficients(200)
        import math

        assert all(math.log(s[n]) <= 4 * math.pi * math.sqrt(n) for n in range(1, 201))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            jfun.j_coefficients(3)[4]


class TestEvaluate:
    def test_i(self):
        with mpmath.workdps(60):
            assert abs(jfun.evaluate_j(ExactPoint.imaginary(1), 50) - 1728) < mpmath.mpf(10) ** -48

    def test_rho(self):
        with mpmath.workdps(60):
            assert abs(jfun.evaluate_j(ExactPoint.from_form(1, 1, 1), 50)) < mpmath.mpf(10) ** -48

    def test_two_i(self):
        with mpmath.workdps(60):
            assert abs(jfun.evaluate_j(ExactPoint.imaginary(2), 50) - 287496) < mpmath.mpf(10) ** -45

    @given(st.integers(0, 10**6))
    def test_against_klein_invariant(self, seed):
        # mpmath's kleinj is j / 1728, computed from theta functions
        rng = random.Random(seed)
        with mpmath.workdps(50):
            z = mpmath.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 2.5))
            tau = NumericPoint.from_complex(z, 40)
            ours = jfun.evaluate_j(tau, 30)
            ref = 1728 * mpmath.kleinj(tau.complex())
            assert abs(ours - ref) < mpmath.mpf(10) ** -25 * (1 + abs(ref))

    @given(st.integers(0, 10**6))
    def test_gamma_invariance(self, seed):
        rng = random.Random(seed)
        gamma = gl2q.random_gamma(rng)
        tau = ExactPoint.imaginary(2)
        with mpmath.workdps(50):
            a = jfun.evaluate_j(apply(gamma, tau), 40)
            b = jfun.evaluate_j(tau, 40)
            assert abs(a - b) < mpmath.mpf(10) ** -35

    def test_reported_error_is_honest(self):
        tau = NumericPoint.from_strings("0.1", "0.95", 60)
        short = jfun.evaluate_j_detailed(tau, 20)
        long = jfun.evaluate_j_detailed(tau, 50)
        with mpmath.workdps(60):
            assert abs(short.value - long.value) <= short.error + long.error

    def test_rejects_zero_digits(self):
        with pytest.raises(ValueError):
            jfun.evaluate_j(ExactPoint.imaginary(1), 0)


class TestCurves:
    def test_3456(self):
        curve = jfun.curve_from_j(3456)
        assert (curve.g2, curve.g3) == (54, 54)
        assert jfun.j_invariant(curve) == 3456

    @pytest.mark.parametrize("j", [0, 1728])
    def test_excluded(self, j):
        with pytest.raises(ExcludedJError):
            jfun.curve_from_j(j)

    def test_special_j(self):
        assert jfun.j_invariant(jfun.WeierstrassCurve(4, 0)) == 1728
        assert jfun.j_invariant(jfun.WeierstrassCurve(0, 4)) == 0
        assert jfun.j_invariant(jfun.WeierstrassCurve(54, 54)) == 3456

    def test_singular(self):
        with pytest.raises(SingularCurveError):
            jfun.j_invariant(jfun.WeierstrassCurve(3, 1))

    @given(st.fractions().filter(lambda j: j not in (0, 1728)))
    def test_round_trip(self, j):
        assert jfun.j_invariant(jfun.curve_from_j(j)) == j

    def test_numeric_round_trip(self):
        with mpmath.workdps(40):
            j = mpmath.mpc("123.5", "-7.25")
            assert abs(jfun.j_invariant(jfun.curve_from_j(j)) - j) < mpmath.mpf(10) ** -30
