"""Finite value sets attached to torsion.

For a linear factor r the annihilator value is rho = (tau-1)^(-1)(gamma),
with gamma = v(a) for t - a and gamma = -v(b) for t*b - 1.  If w(n) = delta,
the solutions m of m.r = n are m0 + ker(r) with w(m0) = U = upsilon(r, delta),
so their values are {U}, together with rho when the kernel is nontrivial and
rho < U.  (When rho = U no cancellation is possible: a solution of value
above U would force w(n) > delta.)

For q = r * q1 with r linear:

    F_q        = {rho(r)} u { U(r, f) : f in F_q1 }
    G_q(delta) = union over d' in G_q1(delta) of LDV(r, d')

Every value carries the set of factor positions whose annihilator must be
nontrivial for the value to occur, and a provenance chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .ore_poly import OrePoly
from .solve import LinearFactor, factorize
from .value_geometry import INF, DeltaPoint, as_delta, fmt_delta, tau_minus_one_inv, upsilon


@dataclass(frozen=True)
class ValueEntry:
    value: Fraction
    requires: FrozenSet[int]
    chain: Tuple[str, ...]


@dataclass
class ValueSet:
    kind: str  # "ann" or "div"
    degree: int
    factors: List[LinearFactor]
    entries: List[ValueEntry]
    delta: Optional[DeltaPoint] = None
    defect: bool = False
    notes: List[str] = dc_field(default_factory=list)

    def possible_nontrivial(self) -> Set[int]:
        return {i for i, f in enumerate(self.factors) if annihilator_possible(f)}

    def values(self, nontrivial: Optional[Iterable[int]] = None) -> List[Fraction]:
        """Values occurring when exactly the listed factor annihilators are nontrivial.

        None means every factor whose annihilator can be nontrivial is
        (the maximal-torsion reading).
        """
        allowed = self.possible_nontrivial() if nontrivial is None else set(nontrivial)
        return sorted({e.value for e in self.entries if e.requires <= allowed})

    def all_values(self) -> List[Fraction]:
        return sorted({e.value for e in self.entries})

    def bound(self) -> int:
        return 2 ** (self.degree - 1) if self.kind == "ann" else 2 ** self.degree

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "degree": self.degree,
            "delta": None if self.delta is None else fmt_delta(self.delta),
            "factors": [str(f) for f in self.factors],
            "values": [fmt_delta(v) for v in self.values()],
            "entries": [
                {"value": fmt_delta(e.value), "requires_nontrivial": sorted(e.requires), "chain": list(e.chain)}
                for e in sorted(self.entries, key=lambda e: (e.value, sorted(e.requires)))
            ],
            "bound": self.bound(),
        }


def _payload_val(f: LinearFactor) -> Fraction:
    v = f.payload.vlow()
    return v


def annihilator_possible(f: LinearFactor) -> bool:
    """Whether the factor can have a nonzero annihilator in some model."""
    if f.kind == "const":
        return False
    if f.kind == "monic" and not f.payload.terms and f.payload.prec is INF:
        return False  # r = t
    return True


def linear_ann_value(f: LinearFactor) -> Fraction:
    """Valuation of every nonzero element of ann(f)."""
    if not annihilator_possible(f):
        raise ValueError(f"factor {f} has trivial annihilator")
    p = f.payload.ring.p
    if f.kind == "monic":
        return tau_minus_one_inv(_payload_val(f), p)
    return tau_minus_one_inv(-_payload_val(f), p)


def _case_label(f: LinearFactor, delta: Fraction) -> str:
    if f.kind == "const":
        return "const"
    if not annihilator_possible(f):
        return "t"
    rho = linear_ann_value(f)
    if f.kind == "unit":
        return "(i)" if delta > rho else "(ii)" if delta < rho else "(iii)"
    upper = rho + _payload_val(f)
    if delta == rho:
        return "(iii)"
    if delta < rho:
        return "(ii)"
    if delta < upper:
        return "(ia)"
    return "(ib)" if delta > upper else "(ic)"


def upsilon_linear(f: LinearFactor, delta: Fraction) -> Fraction:
    if f.kind == "const":
        return delta - _payload_val(f)
    return upsilon(f.as_poly().profile(), delta)[0]


def linear_div_values(
    f: LinearFactor, delta, ann_nontrivial: bool
) -> List[Tuple[Fraction, bool, str]]:
    """[(value, needs_nontrivial_ann, case)] for solutions m of m.f = n, w(n) = delta."""
    delta = as_delta(delta)
    if delta is INF:
        raise ValueError("division value set needs a finite delta")
    U = upsilon_linear(f, delta)
    label = _case_label(f, delta)
    out = [(U, False, label)]
    if ann_nontrivial and annihilator_possible(f):
        rho = linear_ann_value(f)
        if rho < U:
            out.append((rho, True, label))
    return out


def _suffix_sets(factors: Sequence[LinearFactor], delta: Optional[Fraction]):
    """(F, G) entry lists for the product of all factors."""
    d = len(factors)
    const = factors[-1]
    F: List[ValueEntry] = []
    G: List[ValueEntry] = []
    if delta is not None:
        G = [ValueEntry(delta - _payload_val(const), frozenset(), ("const",))]
    for j in range(d - 2, -1, -1):
        f = factors[j]
        name = f"f{j}:{f}"
        newF: Dict[Tuple[Fraction, FrozenSet[int]], ValueEntry] = {}
        if annihilator_possible(f):
            rho = linear_ann_value(f)
            key = (rho, frozenset({j}))
            newF[key] = ValueEntry(rho, frozenset({j}), (f"{name} ann",))
        for e in F:
            U = upsilon_linear(f, e.value)
            key = (U, e.requires)
            newF.setdefault(key, ValueEntry(U, e.requires, e.chain + (f"{name} U {_case_label(f, e.value)}",)))
        F = _prune(newF.values())
        if delta is not None:
            newG: Dict[Tuple[Fraction, FrozenSet[int]], ValueEntry] = {}
            for e in G:
                for val, needs, label in linear_div_values(f, e.value, True):
                    req = e.requires | {j} if needs else e.requires
                    tag = "ann" if needs else "U"
                    newG.setdefault((val, req), ValueEntry(val, req, e.chain + (f"{name} {tag} {label}",)))
            G = _prune(newG.values())
    return F, G


def _prune(entries: Iterable[ValueEntry]) -> List[ValueEntry]:
    """Drop entries whose value is also reachable under a weaker requirement."""
    entries = list(entries)
    out = []
    for e in entries:
        if any(o.value == e.value and o.requires < e.requires for o in entries):
            continue
        out.append(e)
    return sorted(out, key=lambda e: (e.value, sorted(e.requires)))


def _factorize(q: OrePoly, N) -> Tuple[List[LinearFactor], bool, List[str]]:
    if not q.in_I():
        raise ValueError("value sets need a polynomial in I")
    fz = factorize(q, N)
    notes = list(fz.notes)
    defect = not fz.prefixes_in_I
    for f in fz.factors:
        if f.kind != "monic" or f.payload.terms or f.payload.prec is not INF:
            if not f.payload.terms or f.payload.terms[0][0] >= f.payload.prec:
                defect = True
                notes.append(f"factor {f} has undetermined valuation")
    if fz.precision < N:
        notes.append(f"factorization known below {fz.precision} only")
    return fz.factors, defect, notes


def ann_value_set(q: OrePoly, N=24, factors: Optional[List[LinearFactor]] = None) -> ValueSet:
    """Possible valuations of nonzero annihilator elements of q."""
    if factors is None:
        factors, defect, notes = _factorize(q, N)
    else:
        defect, notes = False, []
    F, _ = _suffix_sets(factors, None)
    vs = ValueSet("ann", q.degree, factors, F, None, defect, notes)
    if len(vs.all_values()) > max(1, vs.bound()) and q.degree >= 1:
        raise AssertionError("annihilator value set exceeds its cardinality bound")
    return vs


def div_value_set(q: OrePoly, delta, N=24, factors: Optional[List[LinearFactor]] = None) -> ValueSet:
    """Possible valuations of solutions m of m.q = n when w(n) = delta."""
    delta = as_delta(delta)
    if delta is INF:
        raise ValueError("division value set needs a finite delta")
    if factors is None:
        factors, defect, notes = _factorize(q, N)
    else:
        defect, notes = False, []
    _, G = _suffix_sets(factors, delta)
    vs = ValueSet("div", q.degree, factors, G, delta, defect, notes)
    if len(vs.all_values()) > vs.bound():
        raise AssertionError("division value set exceeds its cardinality bound")
    return vs
