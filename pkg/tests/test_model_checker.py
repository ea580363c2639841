import random

from oreqe.formula import parse_formula, parse_qf
from oreqe.model_checker import (
    NO,
    UNKNOWN,
    YES,
    SamplerConfig,
    check_axioms,
    compare,
    sample_assignment,
    solvable,
)
from oreqe.qe_engine import eliminate
from oreqe.series_field import default_ring

F4 = default_ring(2, 2)
Z2 = default_ring(2, 1, "tame:1")
TAME3 = default_ring(2, 1, "tame:3")


def pp(ring, text):
    return parse_formula(ring, text)


class TestSolvable:
    def test_division_witness(self):
        v = solvable(pp(F4, "E u . u*(t - T) = y"), {"y": F4.parse("T^2")})
        assert v.status == YES and v.witness == {"u": "w*T"}

    def test_tame_parity_obstruction(self):
        v = solvable(pp(Z2, "E u . u*t = y"), {"y": Z2.T})
        assert v.status in (UNKNOWN, NO)
        assert "Lattice" in v.note

    def test_contradictory_valuation(self):
        v = solvable(pp(F4, "E u . u = b & V[2](u)"), {"b": F4.T})
        assert v.status == NO

    def test_congruences_only(self):
        phi = pp(F4, "E u . V[1](u*t - y1) & V[3](u*(t + 1) - y2)")
        v = solvable(phi, {"y1": F4.parse("T^2"), "y2": F4.parse("T^2")})
        assert v.status == YES

    def test_two_variables(self):
        v = solvable(pp(F4, "E u, v . u*t = y & v*(t + 1) = u"), {"y": F4.T})
        assert v.status == YES

    def test_ground_formula(self):
        phi = pp(F4, "V[1](y - T)")
        assert solvable(phi, {"y": F4.parse("T^2")}).status == YES
        assert solvable(phi, {"y": F4.parse("1")}).status == NO

    def test_witness_satisfies_atoms(self):
        phi = pp(F4, "E u . u*(t^2 + T*t + 1) = y & V[2](u - z)")
        rng = random.Random(5)
        for _ in range(20):
            assign, _ = sample_assignment(phi, rng, SamplerConfig())
            v = solvable(phi, assign)
            if v.status != YES:
                continue
            u = F4.parse(v.witness["u"])
            full = dict(assign, u=u)
            assert all(a.evaluate(full) is not False for a in phi.atoms)


class TestSampler:
    def test_deterministic(self):
        phi = pp(F4, "E u . V[1](u*t - y1) & V[0](u*(t + T) - y2)")
        a = [sample_assignment(phi, random.Random(3), SamplerConfig())[0] for _ in range(2)]
        assert {k: str(v) for k, v in a[0].items()} == {k: str(v) for k, v in a[1].items()}

    def test_tame_samples_stay_in_lattice(self):
        phi = pp(TAME3, "E u . V[1](L1(u) - y1) & u*(t + 1) = y2")
        rng = random.Random(0)
        for _ in range(50):
            assign, _ = sample_assignment(phi, rng, SamplerConfig())
            for x in assign.values():
                assert all(TAME3.lattice.contains(e) for e, _ in x.terms)

    def test_both_kinds_occur(self):
        phi = pp(F4, "E u . V[1](u*t - y)")
        rng = random.Random(1)
        kinds = {sample_assignment(phi, rng, SamplerConfig())[1] for _ in range(40)}
        assert kinds == {"planted", "random"}


class TestCompare:
    def test_density(self):
        phi = pp(F4, "E u . V[0](u*t - y)")
        rep = compare(phi, parse_qf(F4, "true"), samples=40)
        assert rep.ok() and rep.yes == 40 - rep.unknown

    def test_false_equivalent(self):
        phi = pp(F4, "E u . u = T & V[2](u)")
        rep = compare(phi, parse_qf(F4, "false"), samples=10)
        assert rep.ok() and rep.no == 10

    def test_detects_wrong_output(self):
        phi = pp(F4, "E u . u = y1 & V[3](u - y2)")
        rep = compare(phi, parse_qf(F4, "true"), samples=60)
        assert not rep.ok()
        assert rep.disagreements[0].phi == NO

    def test_cas1_both_verdicts(self):
        phi = pp(F4, "E u . V[0](u*t - b1) & V[0](u*(t - T) - b2)")
        psi, _ = eliminate(phi)
        rep = compare(phi, psi, samples=100)
        assert rep.ok()
        assert rep.yes > 0 and rep.no > 0
        assert rep.unknown_rate < 0.2

    def test_report_json(self):
        phi = pp(F4, "E u . V[0](u*t - y)")
        js = compare(phi, parse_qf(F4, "true"), samples=5).to_json()
        assert js["samples"] == 5 and js["disagreements"] == []


class TestAxioms:
    def test_full_kind(self):
        rep = check_axioms(F4, samples=60, seed=1)
        assert rep.ok(), rep.to_json()
        assert all(r.checked > 0 for r in rep.results)

    def test_tame_kind(self):
        rep = check_axioms(TAME3, samples=60, seed=1)
        assert rep.ok(), rep.to_json()
        assert {r.name for r in rep.results} >= {"Tw ultrametric", "TV addition", "sigma-basis", "TV+ division"}
