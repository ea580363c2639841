import random
from fractions import Fraction as Fr

import pytest

from oreqe.ore_poly import OrePoly
from oreqe.series_field import default_ring
from oreqe.solve import LinearFactor
from oreqe.torsion_values import (
    ann_value_set,
    div_value_set,
    linear_ann_value,
    linear_div_values,
)

from oracles import random_separable_in_I, witness_values

F2 = default_ring(2, 1)
F3 = default_ring(3, 1)
F4 = default_ring(2, 2)


def P(ring, text):
    return OrePoly.parse(ring, text)


def monic(ring, text):
    return LinearFactor("monic", ring.parse(text))


def unit(ring, text):
    return LinearFactor("unit", ring.parse(text))


class TestLinear:
    def test_monic_annihilator_value(self):
        assert linear_ann_value(monic(F2, "T")) == 1

    def test_unit_annihilator_value(self):
        assert linear_ann_value(unit(F2, "T")) == -1

    def test_unit_root(self):
        for ring in (F2, F3):
            assert linear_ann_value(monic(ring, "1")) == 0

    def test_constant_has_no_value(self):
        with pytest.raises(ValueError):
            linear_ann_value(LinearFactor("const", F2.one()))

    def test_unit_above_threshold(self):
        out = linear_div_values(unit(F2, "T"), 0, True)
        assert sorted(v for v, _, _ in out) == [-1, 0]
        assert {case for _, _, case in out} == {"(i)"}

    def test_unit_below_threshold(self):
        out = linear_div_values(unit(F2, "T"), -2, True)
        assert [(v, case) for v, _, case in out] == [(Fr(-3, 2), "(ii)")]

    def test_monic_trivial_annihilator(self):
        out = linear_div_values(monic(F2, "T"), 2, False)
        assert [v for v, _, _ in out] == [1]

    def test_infinite_delta_rejected(self):
        with pytest.raises(ValueError):
            linear_div_values(monic(F2, "T"), "oo", True)


class TestValueSets:
    def test_single_factor(self):
        assert ann_value_set(P(F4, "t - T")).values() == [1]

    def test_constant_roots_over_f4(self):
        assert ann_value_set(P(F4, "t^2 + 1")).values() == [0]

    def test_mixed_valuations(self):
        q = P(F4, "(t - T)*(t - T^3)")
        vs = ann_value_set(q)
        ann, _, _ = witness_values(q, None)
        assert vs.values() == ann == [1, 2]
        assert len(vs.values()) <= vs.bound()

    def test_trivial_annihilator_reading(self):
        q = P(F4, "t*T - 1")
        vs = div_value_set(q, 0)
        assert vs.values() == [-1, 0]
        assert vs.values(nontrivial=[]) == [0]

    def test_json_shape(self):
        js = div_value_set(P(F4, "t - T"), 2).to_json()
        assert js["kind"] == "div" and js["values"] == ["1"] and js["bound"] == 2

    def test_outside_I_rejected(self):
        with pytest.raises(ValueError):
            ann_value_set(P(F4, "t*T"))

    @pytest.mark.parametrize("seed", range(12))
    def test_against_witness_search(self, seed):
        rng = random.Random(seed)
        q = random_separable_in_I(rng, F4)
        delta = Fr(rng.randint(-4, 12), rng.choice([1, 2]))
        A, D = ann_value_set(q, 16), div_value_set(q, delta, 16)
        ann, div, rs = witness_values(q, delta)
        assert rs.complete()
        assert A.values() == ann
        assert D.values() == div
        assert len(ann) <= A.bound() and len(div) <= D.bound()
