import itertools
import random

import mpmath
import pytest

from jcover import fingal, gl2q, hecke, modelcheck
from jcover.errors import PreconditionError
from jcover.fingal import FiniteGroupElement, TorsorLabel
from jcover.gl2q import GroupElement
from jcover.halfplane import ExactPoint
from jcover.modelcheck import FiniteLevelStructure, HPoint, finite_type, generic_point


def structure(level, *points, digits=30):
    return FiniteLevelStructure(level, tuple(points), digits)


def point(name, tau, level, label=None):
    return HPoint(name, tau, label or TorsorLabel.identity(level))


class TestTypes:
    def test_gamma_translate_equal_at_level_one(self):
        tau = generic_point(seed=5)
        gamma = gl2q.random_gamma(random.Random(1))
        s = structure(1, point("a", tau, 1), point("b", modelcheck.apply(gamma, tau), 1))
        t = finite_type(s, ["a", "b"])
        assert t.classes == (0, 0)
        assert t.determinate

    def test_special_flag(self):
        s = structure(2, point("i", ExactPoint.imaginary(1), 2))
        t = finite_type(s, ["i"])
        assert t.special == (-4,)
        assert t.base == (1728,)

    def test_phi_relation_recorded(self):
        s = structure(2, point("p", ExactPoint.imaginary(2), 2), point("q", ExactPoint.imaginary(4), 2))
        t = finite_type(s, ["p", "q"])
        base = [t.coordinates.index((i, 1, 0)) for i in range(2)]
        assert (base[0], base[1], 2) in t.relations
        assert t.special == (-16, -64) and t.base[0] == 287496

    def test_level_two_coordinates_oracle(self):
        # coordinates of an identity-labelled generic point are j at the Hecke representatives
        tau = generic_point(seed=9)
        s = structure(2, point("a", tau, 2))
        values = modelcheck.coordinate_values(s, s.point("a"), 2)
        red = s.effective(s.point("a"))[0]
        expected = hecke.orbit_at_level(red, 2, 30)
        with mpmath.workdps(40):
            for v, w in zip(values, expected):
                assert abs(v.value - w) < mpmath.mpf(10) ** -20

    def test_moved_structure_has_same_type(self):
        s = modelcheck.nonstandard_fiber_witness(3)
        gamma = gl2q.random_gamma(random.Random(7))
        assert finite_type(s, s.names) == finite_type(s.moved(gamma), s.names)

    def test_twist_preserves_type(self):
        s = structure(
            3,
            point("a", generic_point(seed=1), 3),
            point("b", generic_point(seed=1), 3, TorsorLabel.of((1, 1, 0, 1), 3)),
            point("c", generic_point(seed=2), 3),
        )
        base = finite_type(s, s.names)
        for sigma in fingal.group_elements(3):
            assert finite_type(s.twisted(sigma), s.names) == base

    def test_restrict(self):
        s = modelcheck.nonstandard_fiber_witness(2)
        assert finite_type(s, s.names).restrict(1) == finite_type(s, s.names, level=1)

    def test_witness_orbit_patterns_differ(self):
        s = modelcheck.nonstandard_fiber_witness(2)
        t = finite_type(s, s.names)
        first = [t.classes[c] for c, (i, m, _) in enumerate(t.coordinates) if i == 0 and m == 2]
        second = [t.classes[c] for c, (i, m, _) in enumerate(t.coordinates) if i == 1 and m == 2]
        assert sorted(first) == sorted(second) and first != second
        assert t.classes[t.coordinates.index((0, 1, 0))] == t.classes[t.coordinates.index((1, 1, 0))]


class TestStandardFibres:
    def test_witness_violates(self):
        for n in (2, 3, 4):
            assert modelcheck.nonstandard_fiber_witness(n).sf_violations() == [("t1", "t2")]

    def test_equal_labels_collapse(self):
        tau = generic_point(seed=3)
        s = structure(2, point("a", tau, 2), point("b", tau, 2))
        assert s.satisfies_sf()
        assert s.sf_identify().names == ("a",)

    def test_distinct_labels_do_not_collapse(self):
        s = modelcheck.nonstandard_fiber_witness(2)
        assert s.sf_identify().names == ("t1", "t2")

    def test_label_follows_gamma(self):
        # (gamma tau, lambda gamma^-1) is the same point as (tau, lambda)
        tau = generic_point(seed=4)
        gamma = gl2q.random_gamma(random.Random(2))
        lam = TorsorLabel.of((1, 1, 0, 1), 3)
        moved = lam.twist(FiniteGroupElement.lift_of(gamma, 3).inverse())
        s = structure(3, point("a", tau, 3, lam), point("b", modelcheck.apply(gamma, tau), 3, moved))
        assert s.satisfies_sf()

    def test_special_points_ignore_labels(self):
        s = structure(2, point("a", ExactPoint.imaginary(1), 2), point("b", ExactPoint.imaginary(1), 2, TorsorLabel.of((0, 1, 1, 0), 2)))
        assert s.satisfies_sf()


class TestBackAndForth:
    def test_identity_map(self):
        s = modelcheck.nonstandard_fiber_witness(2)
        y, sigma = modelcheck.extend_partial_iso(s, s, {"t1": "t1"}, "t2")
        assert y.name == "t2" and sigma.is_identity()

    @pytest.mark.parametrize("sigma", fingal.group_elements(2))
    def test_twisted_target_level_two(self, sigma):
        s = structure(2, point("p", generic_point(seed=1), 2), point("q", generic_point(seed=2), 2))
        target = s.twisted(sigma)
        final, partial, steps = modelcheck.back_and_forth(s, target)
        assert partial == {"p": "p", "q": "q"}
        assert all(step.twist == sigma and not step.fresh for step in steps)
        assert final.names == target.names

    def test_precondition(self):
        s = structure(2, point("a", ExactPoint.imaginary(2), 2), point("b", generic_point(seed=1), 2))
        t = structure(2, point("c", ExactPoint.imaginary(1), 2), point("d", generic_point(seed=1), 2))
        with pytest.raises(PreconditionError):
            modelcheck.extend_partial_iso(s, t, {"a": "c"}, "b")

    def test_fresh_point_adjoined(self):
        tau = generic_point(seed=6)
        source = structure(2, point("a", tau, 2), point("b", tau, 2, TorsorLabel.of((0, 1, 1, 0), 2)))
        target = structure(2, point("x", tau, 2))
        final, partial, steps = modelcheck.back_and_forth(source, target)
        assert partial["a"] == "x" and steps[1].fresh
        assert finite_type(source, source.names) == finite_type(final, [partial[n] for n in source.names])

    @pytest.mark.parametrize("level", [2, 3])
    def test_exhaustive_twists_preserve_type(self, level):
        tau = generic_point(seed=11)
        source = structure(
            level,
            point("a", tau, level),
            point("b", tau, level, TorsorLabel(fingal.group_elements(level)[1])),
            point("s", ExactPoint.imaginary(1), level),
        )
        lhs = finite_type(source, source.names)
        for sigma in fingal.group_elements(level):
            final, partial, _ = modelcheck.back_and_forth(source, source.twisted(sigma))
            assert finite_type(final, [partial[n] for n in source.names]) == lhs


class TestCounts:
    def orbit(self):
        tau = generic_point(seed=8)
        return hecke.orbit_evaluations(tau, 2, 30)

    def test_full_group(self):
        orbit = [ev.approx() for ev in self.orbit()]
        assert modelcheck.count_types_over_point(orbit, 2, fingal.group_elements(2)) == 1

    def test_trivial_group(self):
        orbit = [ev.approx() for ev in self.orbit()]
        assert modelcheck.count_types_over_point(orbit, 2, []) == 6

    def test_index_three(self):
        orbit = [ev.approx() for ev in self.orbit()]
        involution = FiniteGroupElement.of((0, 1, 1, 0), 2)
        assert modelcheck.count_types_over_point(orbit, 2, [involution]) == 3

    def test_orbit_length_checked(self):
        with pytest.raises(ValueError):
            modelcheck.count_types_over_point([1, 2], 2, [])


class TestPsi:
    def test_vacuous(self):
        assert modelcheck.psi_axiom_check([GroupElement.identity()], samples=2).passed

    def test_doubling(self):
        report = modelcheck.psi_axiom_check([GroupElement.identity(), GroupElement(2, 0, 0, 1)], samples=5)
        assert report.passed and report.max_residual < report.bound

    def test_level_two_representatives(self):
        report = modelcheck.psi_axiom_check(list(gl2q.coset_representatives(2)), samples=2)
        assert report.passed and report.pairs == 3

    def test_pair_without_identity(self):
        # diag(2,1) diag(3,1)^-1 has level 6, so Phi_6 must relate j(2 tau) and j(3 tau)
        report = modelcheck.psi_axiom_check([GroupElement(2, 0, 0, 1), GroupElement(3, 0, 0, 1)], samples=1)
        assert report.passed


def test_point_json_round_trip():
    p = point("a", generic_point(seed=2), 3, TorsorLabel.of((1, 1, 0, 1), 3))
    assert HPoint.from_json(p.to_json(), 3) == p


def test_structure_json():
    s = structure(2, point("i", ExactPoint.imaginary(1), 2), point("g", generic_point(seed=2), 2))
    data = s.to_json()
    assert data["points"][0]["j"] == {"exact": "1728"} and data["points"][0]["discriminant"] == "-4"
    assert "re" in data["points"][1]["j"]


def test_restrict_to_intermediate_level():
    tau = generic_point(seed=12)
    s = structure(4, point("a", tau, 4), point("b", tau, 4, TorsorLabel(fingal.group_elements(4)[5])))
    assert finite_type(s, s.names).restrict(2) == finite_type(s, s.names, level=2)
