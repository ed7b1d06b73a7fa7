from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, strategies as st

from stabred.errors import BadInput, NotCoprime
from stabred.lattice import Lattice, det, vec
from stabred.toric_surface import (
    CyclicQuotient2D,
    cone_quotient_type,
    evaluate_hj,
    hj_expansion,
    normalize_cone_2d,
    quotient_weights_2d,
    same_singularity,
    standard_cone,
    toric_self_intersection,
)

Z2 = Lattice.standard(2)


def inverse_by_search(n, k):
    return next(x for x in range(k) if (n * x) % k == 1 % k)


def coprime_pairs(limit):
    return st.tuples(st.integers(2, limit), st.integers(1, limit)).filter(
        lambda p: p[1] < p[0] and gcd(*p) == 1
    )


class TestNormalize:
    def test_five_two(self):
        norm = normalize_cone_2d(5, 2)
        assert norm.quotient == CyclicQuotient2D(5, 3)
        assert (2 * 3) % 5 == 1
        (a, b), (c, d) = norm.matrix
        assert a * d - b * c == -1

    def test_seven_three(self):
        assert normalize_cone_2d(7, 3).quotient.nprime == 5

    def test_order_one_is_smooth(self):
        for n in (-4, 0, 1, 9):
            q = normalize_cone_2d(1, n).quotient
            assert q.is_smooth and q.nprime == 0

    def test_not_coprime(self):
        with pytest.raises(NotCoprime):
            normalize_cone_2d(6, 4)

    @given(st.integers(1, 60), st.integers(-200, 200))
    def test_inverse_and_matrix(self, k, n):
        if gcd(k, n) != 1:
            return
        norm = normalize_cone_2d(k, n)
        if k > 1:
            assert norm.quotient.nprime == inverse_by_search(n % k, k)
        (a, b), (c, d) = norm.matrix
        assert abs(a * d - b * c) == 1
        # M sends f2 to k f1 - n' f2 and k f1 - n f2 to f2
        nprime = norm.quotient.nprime
        apply = lambda x, y: (a * x + b * y, c * x + d * y)
        assert apply(0, 1) == (k, -nprime)
        assert apply(k, -n) == (0, 1)


class TestHirzebruchJung:
    def test_five_two(self):
        chain = hj_expansion(5, 2)
        assert chain.entries == (3, 2)
        assert evaluate_hj([3, 2]) == Fraction(5, 2)

    @pytest.mark.parametrize("k", range(2, 12))
    def test_rational_double_point(self, k):
        assert hj_expansion(k, k - 1).entries == (2,) * (k - 1)

    def test_single_curve(self):
        chain = hj_expansion(2, 1)
        assert chain.entries == (2,)
        assert chain.self_intersections() == (-2,)

    def test_bad_input(self):
        with pytest.raises(BadInput):
            hj_expansion(4, 2)
        with pytest.raises(BadInput):
            hj_expansion(3, 3)

    @given(coprime_pairs(400))
    def test_evaluates_back(self, pair):
        k, nprime = pair
        chain = hj_expansion(k, nprime)
        assert all(a >= 2 for a in chain.entries)
        assert chain.value() == Fraction(k, nprime)


class TestWeights:
    def test_examples(self):
        assert quotient_weights_2d(CyclicQuotient2D(5, 3)) == (5, (3, 1))
        assert quotient_weights_2d(CyclicQuotient2D(1, 0)) == (1, (0, 1))
        assert quotient_weights_2d(CyclicQuotient2D(2, 1)) == (2, (1, 1))
        assert hj_expansion(2, 1).entries == (2,)

    def test_text(self):
        assert str(CyclicQuotient2D(5, 3)) == "A_{3,5}"
        assert str(CyclicQuotient2D(1, 0)) == "smooth"

    def test_invalid(self):
        with pytest.raises(NotCoprime):
            CyclicQuotient2D(6, 2)
        with pytest.raises(BadInput):
            CyclicQuotient2D(5, 5)


class TestConeQuotient:
    @given(coprime_pairs(40))
    def test_standard_cone_reads_back(self, pair):
        k, n = pair
        u, v = standard_cone(k, n)
        got = cone_quotient_type(u, v, Z2)
        assert got == normalize_cone_2d(k, n).quotient

    @given(coprime_pairs(30), st.integers(-3, 3), st.integers(-3, 3))
    def test_invariant_under_unimodular_change(self, pair, s, t):
        k, n = pair
        u, v = standard_cone(k, n)
        m = ((1, s), (t, 1 + s * t))  # det 1
        apply = lambda x: vec(m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1])
        got = cone_quotient_type(apply(u), apply(v), Z2)
        assert same_singularity(got, normalize_cone_2d(k, n).quotient)

    def test_swap_inverts_weight(self):
        u, v = standard_cone(7, 3)
        a = cone_quotient_type(u, v, Z2)
        b = cone_quotient_type(v, u, Z2)
        assert same_singularity(a, b)


class TestSelfIntersection:
    @given(coprime_pairs(30))
    def test_curve_in_two_cone_fan(self, pair):
        k, n = pair
        # <e1, e2> u <e1, n e1 - k e2>: curve of e1 has self-intersection -n/k
        got = toric_self_intersection(vec(0, 1), vec(1, 0), vec(n, -k), Z2)
        assert got == Fraction(-n, k)

    def test_orientation_does_not_matter(self):
        a = toric_self_intersection(vec(0, 1), vec(1, 0), vec(3, -2), Z2)
        b = toric_self_intersection(vec(3, -2), vec(1, 0), vec(0, 1), Z2)
        assert a == b == Fraction(-3, 2)

    def test_hirzebruch_surface(self):
        # F_2 has rays e1, e2, -e1 + 2 e2, -e2; the curve of e2 is the (-2)-section
        got = toric_self_intersection(vec(1, 0), vec(0, 1), vec(-1, 2), Z2)
        assert got == -det([vec(1, 0), vec(-1, 2)]) / (det([vec(1, 0), vec(0, 1)]) * det([vec(0, 1), vec(-1, 2)]))
        assert got == -2
