import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oreqe.coeff_field import (
    ExtensionCapError,
    additive_kernel,
    additive_kernel_ints,
    embedding,
    extend_until_kernel_full,
    frobenius,
    get_field,
    span_ints,
)

from oracles import brute_kernel

SMALL = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1)]


@st.composite
def field_and_elems(draw, n=3):
    p, k = draw(st.sampled_from(SMALL))
    F = get_field(p, k)
    return F, [draw(st.integers(0, F.size - 1)) for _ in range(n)]


class TestArithmetic:
    def test_f4_generator(self):
        F = get_field(2, 2)
        w = F.elem(F.gen)
        assert w * w + w + 1 == F.elem(0)

    @given(field_and_elems())
    def test_field_axioms(self, data):
        F, (a, b, c) = data
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1

    @given(field_and_elems())
    def test_frobenius_is_additive_and_multiplicative(self, data):
        F, (a, b, _) = data
        assert F.frob(F.add(a, b)) == F.add(F.frob(a), F.frob(b))
        assert F.frob(F.mul(a, b)) == F.mul(F.frob(a), F.frob(b))
        assert F.frob(a) == F.pow(a, F.p)

    @given(field_and_elems(), st.integers(-4, 4))
    def test_frobenius_inverse(self, data, n):
        F, (a, _, _) = data
        assert F.frob(F.frob(a, n), -n) == a

    def test_frobenius_fixed_points(self):
        F = get_field(2, 2)
        for n in (1, -1, 3):
            assert frobenius(F.elem(0), n) == F.elem(0)
            assert frobenius(F.elem(1), n) == F.elem(1)

    def test_frobenius_on_omega(self):
        F = get_field(2, 2)
        w = F.elem(F.gen)
        assert frobenius(w, 1) == w + 1
        assert frobenius(w, -1) == w * w

    def test_format_parse_round_trip(self):
        F = get_field(3, 2)
        for a in F.elements():
            assert F.parse(F.format(a)) == a

    def test_reducible_modulus_rejected(self):
        with pytest.raises(ValueError):
            get_field(2, 2, (1, 0, 1))


class TestKernel:
    def test_artin_schreier_f2(self):
        F = get_field(2, 1)
        assert additive_kernel([F.elem(1), F.elem(1)]) == [F.elem(1)]

    def test_x4_plus_x_over_f4(self):
        F = get_field(2, 2)
        basis = additive_kernel([F.elem(1), F.elem(0), F.elem(1)])
        assert sorted(span_ints(F, [b.value for b in basis])) == list(F.elements())
        assert len(basis) == 2

    def test_inseparable_has_trivial_kernel(self):
        F = get_field(2, 2)
        assert additive_kernel([F.elem(0), F.elem(1)]) == []

    def test_all_zero_rejected(self):
        F = get_field(2, 2)
        with pytest.raises(ValueError):
            additive_kernel([F.elem(0), F.elem(0)])

    @given(field_and_elems(n=3), st.integers(1, 2))
    def test_kernel_matches_enumeration(self, data, d):
        F, cs = data
        cs = cs[: d + 1]
        if not any(cs):
            cs[0] = 1
        basis = additive_kernel_ints(F, cs)
        assert sorted(span_ints(F, basis)) == brute_kernel(F, cs)
        assert len(span_ints(F, basis)) == F.p ** len(basis)


class TestExtensions:
    def test_stays_put(self):
        F = get_field(2, 1)
        big, _ = extend_until_kernel_full([F.elem(1), F.elem(1)], 1)
        assert big.size == 2

    def test_x4_plus_x_needs_f4(self):
        F = get_field(2, 1)
        big, _ = extend_until_kernel_full([F.elem(1), F.elem(0), F.elem(1)], 2)
        assert big.size == 4

    def test_omega_twisted(self):
        F = get_field(2, 2)
        w = F.elem(F.gen)
        big, emb = extend_until_kernel_full([w, F.elem(0), F.elem(1)], 2)
        cs = [emb(w.value), 0, 1]
        assert len(brute_kernel(big, cs)) == 4
        assert big.k in (2, 4, 6)

    def test_cap_reports_achieved(self):
        F = get_field(2, 1)
        with pytest.raises(ExtensionCapError) as err:
            extend_until_kernel_full([F.elem(1), F.elem(0), F.elem(1)], 2, cap=2)
        assert err.value.achieved == 1

    @pytest.mark.parametrize("small,big", [((2, 1), (2, 2)), ((2, 2), (2, 4)), ((3, 1), (3, 2)), ((2, 2), (2, 6))])
    def test_embedding_is_a_homomorphism(self, small, big):
        S, B = get_field(*small), get_field(*big)
        emb = embedding(S, B)
        for a, b in itertools.product(S.elements(), repeat=2):
            assert emb(S.add(a, b)) == B.add(emb(a), emb(b))
            assert emb(S.mul(a, b)) == B.mul(emb(a), emb(b))
