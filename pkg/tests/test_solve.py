from fractions import Fraction as Fr

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oreqe.ore_poly import OrePoly, module_apply
from oreqe.series_field import LatticeDefect, PrecisionError, default_ring
from oreqe.solve import (
    NotSeparable,
    density_witness,
    divide_witness,
    factorize,
    product,
    roots_to_precision,
    solve_inhomogeneous,
)
from oreqe.value_geometry import INF, upsilon

from conftest import ore_polys, series

F2 = default_ring(2, 1)
F4 = default_ring(2, 2)
Z2 = default_ring(2, 1, "tame:1")


def P(ring, text):
    return OrePoly.parse(ring, text)


@st.composite
def separable_in_I(draw, ring, max_degree=2):
    q = draw(ore_polys(ring, max_degree=max_degree, lo=0, hi=3))
    assume(q.degree >= 1)
    c0 = q.coeff(0)
    if not c0.terms:
        c0 = ring.one()
    coeffs = [c0] + list(q.coeffs[1:])
    q = OrePoly(ring, coeffs)
    assume(q.in_I())
    return q


def brute_constant_roots(q):
    # roots lying in the coefficient field of a constant-coefficient q
    ring = q.ring
    return sorted(c for c in ring.field.elements() if module_apply(ring.scalar(c), q).is_zero())


class TestDivideWitness:
    def test_omega_example(self):
        q = P(F4, "t - T")
        res = divide_witness(F4.parse("T^2"), q)
        assert res.x == F4.parse("w*T")
        assert module_apply(res.x, q) == F4.parse("T^2")

    def test_constant_divisor(self):
        c = F4.parse("w*T")
        n = F4.parse("T^3 + T^5")
        res = divide_witness(n, OrePoly.const(F4, c))
        assert res.x * c == n
        assert res.x.valuation() == n.valuation() - 1

    def test_inseparable_rejected(self):
        with pytest.raises(NotSeparable):
            divide_witness(F2.T, P(F2, "t"))

    @settings(max_examples=60)
    @given(separable_in_I(F4), series(F4, lo=0, hi=4, max_terms=3))
    def test_round_trip(self, q, x):
        assume(not x.is_zero())
        n = module_apply(x, q)
        assume(n.terms)
        N = Fr(12)
        res = divide_witness(n, q, N, partial_ok=True)
        if res.stalled:
            return
        assert res.x.valuation() == upsilon(q.profile(), n.valuation())[0]
        if res.ring == q.ring:
            assert (module_apply(res.x, q) - n).vlow() >= upsilon_inverse_floor(q, res.x.prec)


def upsilon_inverse_floor(q, prec):
    from oreqe.value_geometry import upsilon_inv

    return upsilon_inv(q.profile(), prec) if prec is not INF else INF


class TestSolveInhomogeneous:
    def test_exact_solution_terminates(self):
        q = P(F2, "t + 1")
        res = solve_inhomogeneous(q, F2.parse("T^2 + T"), INF)
        assert module_apply(res.x, q) == F2.parse("T^2 + T")

    def test_tame_lattice_defect(self):
        with pytest.raises(LatticeDefect):
            solve_inhomogeneous(P(Z2, "t"), Z2.T, INF)


class TestRoots:
    def test_constant_polynomial_over_f4(self):
        q = P(F4, "t^2 + 1")
        rs = roots_to_precision(q, 8)
        assert rs.complete()
        assert rs.ring.field == F4.field
        assert sorted(r.residue().value for r in rs.roots) == brute_constant_roots(q)

    def test_linear_root_valuation(self):
        rs = roots_to_precision(P(F2, "t - T"), 10)
        assert rs.valuations == [1]
        assert rs.complete()

    def test_field_extension_when_needed(self):
        rs = roots_to_precision(P(F2, "t^2 + t + 1"), 6)
        assert rs.ring.field.size >= 4
        assert rs.dimension == 2

    @settings(max_examples=40)
    @given(separable_in_I(F4))
    def test_roots_annihilate_to_precision(self, q):
        N = Fr(8)
        rs = roots_to_precision(q, N)
        if not rs.complete():
            return
        qq = q if rs.ring == q.ring else q.embed(_emb(q.ring, rs.ring), rs.ring)
        if all(b.prec >= N for b in rs.basis):
            assert len({r.terms for r in rs.roots}) == q.ring.p ** q.degree
        for r in rs.roots:
            if r.prec >= N:
                assert module_apply(r, qq).vlow() >= upsilon_inverse_floor(qq, N) or not module_apply(r, qq).terms

    def test_inseparable_rejected(self):
        with pytest.raises(NotSeparable):
            roots_to_precision(P(F2, "t^2 + t"), 4)


def _emb(small, big):
    from oreqe.coeff_field import embedding

    return embedding(small.field, big.field)


class TestFactorization:
    def test_t_squared_plus_one(self):
        q = P(F4, "t^2 + 1")
        fz = factorize(q, 12)
        assert fz.reaches(12)
        assert product(fz.factors) == q
        assert fz.factors[-1].kind == "const"

    def test_linear_is_itself(self):
        fz = factorize(P(F2, "t - T"), 12)
        assert [f.kind for f in fz.factors] == ["monic", "const"]
        assert fz.factors[0].payload == F2.T

    def test_unit_constant(self):
        fz = factorize(OrePoly.const(F4, F4.parse("w")), 12)
        assert [f.kind for f in fz.factors] == ["const"]

    def test_outside_I_rejected(self):
        with pytest.raises(ValueError):
            factorize(P(F2, "t*T"), 4)

    @settings(max_examples=30)
    @given(separable_in_I(F4, max_degree=3))
    def test_product_and_prefixes(self, q):
        fz = factorize(q, 12)
        if not fz.reaches(12):
            assert fz.notes or fz.precision < 12
            return
        big = q if fz.ring == q.ring else q.embed(_emb(q.ring, fz.ring), fz.ring)
        assert product(fz.factors).agrees_with(big, 12)


class TestDensity:
    def test_prefix_root(self):
        m = F4.parse("w*T^2 + T^3 + T^7")
        n = density_witness(m, 5)
        assert (m - n.frob()).vlow() >= 5

    def test_needs_precision(self):
        with pytest.raises(PrecisionError):
            density_witness(F2.parse("T").truncate(2), 4)

    def test_tame_parity(self):
        with pytest.raises(LatticeDefect):
            density_witness(Z2.T, 2)

    @given(series(F4), st.integers(-2, 8))
    def test_property(self, m, delta):
        n = density_witness(m, delta)
        assert (m - n.frob()).vlow() >= delta
