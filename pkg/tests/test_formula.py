import pytest
from hypothesis import given
from hypothesis import strategies as st

from oreqe.formula import (
    Atom,
    QFFormula,
    Term,
    apply_lambda,
    apply_lambda_path,
    normalize_lambda,
    parse_formula,
    parse_qf,
    parse_term,
    simplify_atoms,
)
from oreqe.ore_poly import OrePoly
from oreqe.series_field import ParseError, default_ring

from conftest import ore_polys, series

F2 = default_ring(2, 1)
F4 = default_ring(2, 2)
TAME3 = default_ring(2, 1, "tame:3")


@st.composite
def terms(draw, ring, names=("u", "y")):
    t = Term.constant(ring, draw(series(ring, max_terms=2)))
    for _ in range(draw(st.integers(1, 3))):
        v = draw(st.sampled_from(names))
        path = tuple(draw(st.lists(st.integers(0, ring.n - 1), max_size=2)))
        t = t + Term.var(ring, v, path, draw(ore_polys(ring, max_degree=2, hi=3)))
    return t


@st.composite
def assignments(draw, ring, names=("u", "y")):
    return {v: draw(series(ring)) for v in names}


class TestParsing:
    def test_equation(self):
        f = parse_formula(F2, "E u . u*(t - T) = y1")
        assert f.bound == ["u"] and f.free_vars() == ["y1"]
        assert [a.kind for a in f.atoms] == ["eq"]

    def test_congruences_with_lambda(self):
        f = parse_formula(TAME3, "E u . V[3/2]( u*t - y1 ) & V[0]( L0(u)*(t+1) - y2 )")
        assert [a.kind for a in f.atoms] == ["cong", "cong"]
        assert ("u", (0,)) in f.atoms[1].term.monos

    def test_infix_congruence(self):
        f = parse_formula(F2, "E u . u*t ==[2] y")
        assert f.atoms[0].delta == 2

    def test_unused_bound_variable_dropped(self):
        assert parse_formula(F2, "E u v . u*t = y").bound == ["u"]

    def test_errors(self):
        for text in ("E u . u*t =", "E u u . u = y", "E u . L1(u) = y", "E u . u = t"):
            with pytest.raises(ParseError):
                parse_formula(F2, text)

    def test_false_literal(self):
        assert parse_qf(F2, "false").truth is False
        assert parse_qf(F2, "true").is_true()

    @given(terms(F4, names=("u", "y")))
    def test_round_trip_full(self, t):
        assert parse_term(F4, str(t)) == t

    @given(terms(TAME3))
    def test_round_trip_tame(self, t):
        assert parse_term(TAME3, str(t)) == t


class TestLambda:
    def test_additive(self):
        x, y = parse_term(TAME3, "x"), parse_term(TAME3, "y")
        assert apply_lambda(0, x + y) == apply_lambda(0, x) + apply_lambda(0, y)

    def test_full_kind_cancels_t(self):
        assert apply_lambda(0, parse_term(F4, "u*t")) == parse_term(F4, "u")

    @pytest.mark.parametrize("i,j", [(0, 0), (0, 1), (1, 0), (1, 1)])
    def test_sigma_basis_axiom(self, i, j):
        u = Term.var(TAME3, "u", (), OrePoly.t_power(TAME3, 1, TAME3.monomial(1, j)))
        out = apply_lambda(i, u)
        assert out == (Term.var(TAME3, "u") if i == j else Term.zero(TAME3))

    @given(terms(TAME3), assignments(TAME3), st.integers(0, 1))
    def test_semantics(self, t, a, i):
        assert apply_lambda(i, t).evaluate(a) == t.evaluate(a).lam(i)

    @given(terms(TAME3), assignments(TAME3), st.lists(st.integers(0, 1), max_size=3))
    def test_path_semantics(self, t, a, path):
        assert apply_lambda_path(tuple(path), t).evaluate(a) == t.evaluate(a).lam_path(tuple(path))

    @given(terms(TAME3), assignments(TAME3))
    def test_normalization_preserves_value(self, t, a):
        assert normalize_lambda(t).evaluate(a) == t.evaluate(a)

    @given(terms(TAME3), assignments(TAME3), st.integers(0, 1))
    def test_substitution(self, t, a, i):
        value = parse_term(TAME3, "y*t + L1(y)*T")
        a2 = dict(a, u=value.evaluate(a))
        assert t.substitute("u", value).evaluate(a) == t.evaluate(a2)


class TestAtoms:
    def test_three_valued(self):
        y = F2.parse("T^2 + T^5").truncate(6)
        a = {"y": y}
        assert Atom.cong(1, parse_term(F2, "y")).evaluate(a) is True
        assert Atom.cong(3, parse_term(F2, "y")).evaluate(a) is False
        assert Atom.eq(parse_term(F2, "y")).evaluate(a) is False
        z = F2.zero(4)
        assert Atom.cong(3, parse_term(F2, "y")).evaluate({"y": z}) is True
        assert Atom.cong(5, parse_term(F2, "y")).evaluate({"y": z}) is None

    def test_infinite_congruence_rejected(self):
        with pytest.raises(ValueError):
            Atom.cong("oo", parse_term(F2, "y"))

    def test_simplify(self):
        atoms = [Atom.cong(1, parse_term(F2, "T^2")), Atom.eq(parse_term(F2, "y")), Atom.eq(parse_term(F2, "y"))]
        out, ok = simplify_atoms(atoms)
        assert ok and len(out) == 1
        _, ok = simplify_atoms([Atom.eq(parse_term(F2, "T"))])
        assert not ok

    def test_qf_evaluate(self):
        f = QFFormula(F2, [Atom.cong(2, parse_term(F2, "y - T^3"))])
        assert f.evaluate({"y": F2.parse("T^3 + T")}) is False
        assert f.evaluate({"y": F2.parse("T^3 + T^4")}) is True
