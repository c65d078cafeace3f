"""Critical exponents, separable coefficient, and the regime classifier."""

import math
from fractions import Fraction

import pytest

from singprof.params import (
    Params,
    Existence,
    Uniqueness,
    cap_nonexistence,
    classify,
    critical_exponents,
    ell_coeff,
)


class TestCriticalExponents:
    def test_dimension_four(self):
        ce = critical_exponents(4)
        assert ce.q1 == pytest.approx(5 / 3, rel=1e-15)
        assert ce.q2 == pytest.approx(3.0, rel=1e-15)
        assert ce.q3 == pytest.approx(5.0, rel=1e-15)

    def test_low_dimension_conventions(self):
        ce2 = critical_exponents(2)
        assert ce2.q1 == 3.0
        assert math.isinf(ce2.q2) and math.isinf(ce2.q3)
        ce3 = critical_exponents(3)
        assert ce3.q1 == 2.0
        assert ce3.q2 == 5.0
        assert math.isinf(ce3.q3)

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            critical_exponents(1)

    @pytest.mark.parametrize("dim", range(4, 13))
    def test_ordering(self, dim):
        ce = critical_exponents(dim)
        serrin = dim / (dim - 2)
        assert ce.q1 < serrin < ce.q2 < ce.q3


class TestEllCoeff:
    def test_direct_values(self):
        assert ell_coeff(3, 2.0) == pytest.approx(2.0, rel=1e-15)
        assert ell_coeff(4, 2.0) == 0.0

    @pytest.mark.parametrize("dim", range(2, 9))
    def test_value_at_q1_is_first_eigenvalue(self, dim):
        # oracle: N-1 - ell = (N-1)(q+1)/(q-1)^2 * (q - q1) vanishes at q1;
        # confirmed in exact rational arithmetic
        q1 = Fraction(dim + 1, dim - 1)
        ell_exact = Fraction(2) * (dim - q1 * (dim - 2)) / (q1 - 1) ** 2
        assert ell_exact == dim - 1
        got = ell_coeff(dim, float(q1))
        assert got == pytest.approx(dim - 1, rel=1e-12)

    @pytest.mark.parametrize("dim", range(4, 9))
    def test_value_at_q3(self, dim):
        # exact rational value at q3 is -(N-1)(N-3)/4
        q3 = Fraction(dim + 1, dim - 3)
        ell_exact = Fraction(2) * (dim - q3 * (dim - 2)) / (q3 - 1) ** 2
        assert ell_exact == -Fraction((dim - 1) * (dim - 3), 4)
        got = ell_coeff(dim, float(q3))
        assert got == pytest.approx(-(dim - 1) * (dim - 3) / 4, rel=1e-12)

    @pytest.mark.parametrize("dim", [3, 4, 5, 6])
    def test_strictly_decreasing_in_q_up_to_q2(self, dim):
        # d(ell)/dq = 2[(N-2)(q+1) - 2N]/(q-1)^3 is negative exactly for
        # q < q2 = (N+2)/(N-2); the coefficient turns back up afterwards
        q2 = critical_exponents(dim).q2
        hi = min(q2, 8.0)
        qs = [1.1 + (hi - 1.1) * k / 40 for k in range(41)]
        vals = [ell_coeff(dim, q) for q in qs]
        assert all(b < a for a, b in zip(vals[:-1], vals[1:]))

    def test_increasing_past_q2(self):
        # N=4: q2 = 3; the separable coefficient rises back toward 0 after it
        assert ell_coeff(4, 6.0) > ell_coeff(4, 4.0) > ell_coeff(4, 3.0)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            ell_coeff(1, 2.0)
        with pytest.raises(ValueError):
            ell_coeff(3, 1.0)


class TestParams:
    def test_auto_ell(self):
        p = Params(4, 2.0)
        assert p.ell == 0.0
        assert p.ell_is_separable

    def test_validation(self):
        with pytest.raises(ValueError):
            Params(1, 2.0)
        with pytest.raises(ValueError):
            Params(3, 0.5)


class TestClassify:
    def test_separable_at_q1_nonexistence(self):
        rep = classify(Params(3, 2.0, 2.0))
        assert rep.existence is Existence.NOT_EXISTS
        assert rep.uniqueness is Uniqueness.NOT_APPLICABLE
        assert "Thm 1.0(i)" in rep.applied_results

    def test_separable_existence_and_uniqueness(self):
        rep = classify(Params(4, 2.0, 0.0))
        assert rep.existence is Existence.EXISTS
        assert rep.uniqueness is Uniqueness.AT_MOST_ONE
        assert rep.applied_results == ("Thm 1.0(ii)", "Thm 8.2")

    def test_n3_uniqueness_gap(self):
        rep = classify(Params(3, 7.0, -0.1))
        assert rep.uniqueness is Uniqueness.UNKNOWN
        assert rep.thresholds["thm83_ell_max"] == pytest.approx(-2 / 15, rel=1e-12)

    def test_n3_uniqueness_inside_threshold(self):
        rep = classify(Params(3, 7.0, -0.2))
        assert rep.uniqueness is Uniqueness.AT_MOST_ONE
        assert "Thm 8.3" in rep.applied_results

    def test_cap_nonexistence_route(self):
        rep = classify(Params(5, 4.0, -2.0))
        assert rep.existence is Existence.NOT_EXISTS
        assert rep.applied_results == ("Cor 7.1",)

    def test_two_dimensional_uniqueness_any_ell(self):
        rep = classify(Params(2, 2.0, -5.0))
        assert rep.existence is Existence.UNKNOWN
        assert rep.uniqueness is Uniqueness.AT_MOST_ONE
        assert "Thm 8.1" in rep.applied_results

    def test_endpoint_closure_at_q1(self):
        # q exactly q1 takes the closed (nonexistence) side; just above exists
        q1 = critical_exponents(4).q1
        assert classify(Params(4, q1)).existence is Existence.NOT_EXISTS
        assert classify(Params(4, q1 * (1 + 1e-9))).existence is Existence.EXISTS

    def test_endpoint_closure_at_q3(self):
        q3 = critical_exponents(4).q3
        assert classify(Params(4, q3)).existence is Existence.NOT_EXISTS
        assert classify(Params(4, q3 * (1 - 1e-9))).existence is Existence.EXISTS

    def test_q2_note_flag(self):
        rep = classify(Params(4, 3.0))
        assert rep.existence is Existence.EXISTS
        assert any("q2" in note for note in rep.notes)
        assert not classify(Params(4, 2.5)).notes

    def test_deterministic_and_pure(self):
        p = Params(3, 6.0, 0.25)
        assert classify(p) == classify(p)

    @pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
    def test_exists_only_on_separable_window(self, dim):
        ce = critical_exponents(dim)
        qs = [1.05 + 0.37 * k for k in range(20)]
        ells = [-3.0, -0.5, 0.0, 0.7, 2.0]
        for q in qs:
            for ell in ells:
                rep = classify(Params(dim, q, ell))
                if rep.existence is Existence.EXISTS:
                    assert abs(ell - ell_coeff(dim, q)) <= 1e-11 * max(1.0, abs(ell))
                    assert ce.q1 < q < ce.q3

    def test_every_verdict_tagged(self):
        for p in [
            Params(3, 2.0, 2.0),
            Params(4, 2.0),
            Params(3, 7.0, -0.1),
            Params(5, 4.0, -2.0),
            Params(4, 6.0, 1.0),
        ]:
            rep = classify(p)
            assert len(rep.applied_results) >= 1


class TestCapNonexistence:
    def test_reduces_to_half_sphere_threshold_at_zero(self):
        # at lambda = 0 the cap condition must agree with the half-sphere rule
        for dim, q in [(4, 6.0), (5, 4.0), (6, 3.0)]:
            thr = -(dim - 1) / (q - 1)
            for ell in (thr - 0.5, thr, thr + 0.5):
                expect = ell <= thr
                assert cap_nonexistence(Params(dim, q, ell), 0.0) is expect

    def test_matches_classifier_on_full_cap(self):
        for dim, q, ell in [(5, 4.0, -2.0), (5, 4.0, 0.0), (4, 6.0, -1.0), (4, 6.0, -3.0)]:
            rep = classify(Params(dim, q, ell))
            if cap_nonexistence(Params(dim, q, ell), 0.0):
                assert rep.existence is Existence.NOT_EXISTS

    def test_shrinking_cap_admits_larger_ell(self):
        # (N=4, q=6, ell=-0.5): not excluded on the full half-sphere
        # (threshold -3/5) but excluded once lambda reaches 3
        p = Params(4, 6.0, -0.5)
        assert not cap_nonexistence(p, 0.0)
        assert cap_nonexistence(p, 3.0)
        # independent arithmetic: ell(q-1) = -2.5 <= 1-4 + (6*1-5)/3 * 3 = -2
        assert -2.5 <= 1 - 4 + (6 * 1 - 5) / 3 * 3
        # and (4, 6, -1) is already excluded at lambda = 0: -5 <= -3
        assert cap_nonexistence(Params(4, 6.0, -1.0), 0.0)

    def test_monotone_in_lambda(self):
        p = Params(5, 4.0, 1.0)
        flips = [cap_nonexistence(p, lam) for lam in (0.0, 1.0, 5.0, 20.0)]
        # once true it stays true as the cap shrinks further
        assert flips == sorted(flips)

    def test_not_applicable_below_q3(self):
        with pytest.raises(ValueError):
            cap_nonexistence(Params(4, 4.0, 0.0), 1.0)
        with pytest.raises(ValueError):
            cap_nonexistence(Params(3, 9.0, 0.0), 1.0)
