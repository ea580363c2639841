"""Elimination of one existential module quantifier at a time.

A single-variable system has the shape

    u.r0 = b0   &   AND_i  u.t^(n_i).r_i ==[delta_i] b_i   &   side(y)

with r0, r_i separable and in I.  The main loop normalizes the system and
then dispatches:

* Case A (some n_i >= 1): relax the equation into a congruence, then pass
  to u0 = u.t^(n0) (density of M.t^(n0)); scalar-only systems close via the
  ball chain, the two-congruence shape u.t / u.r closes directly.
* Case B' (no equation, all n_i = 0): harden the congruence with the
  largest Upsilon into an equation.
* Case B (equation, all n_i = 0): generalized Euclid against the congruence
  with the largest Upsilon, which lowers the separability degree.

Every step is recorded; a trace replays byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .coeff_field import DEFAULT_EXTENSION_CAP, ExtensionCapError, additive_kernel_ints, extend_until_kernel_full
from .formula import (
    Atom,
    PPFormula,
    QFFormula,
    Term,
    apply_lambda_path,
    format_atom,
    format_term,
    parse_formula,
    simplify_atoms,
)
from .ore_poly import OrePoly, format_ore, generalized_right_divide, lambda_decompose_poly, recompose_lambda
from .series_field import SeriesElem, SeriesRing
from .value_geometry import INF, fmt_delta, tau, upsilon, upsilon_inv

SCHEMA = "oreqe.trace/1"
MODES = ("torsion-free", "ttor", "axioms")
MAX_ITERATIONS = 200


class InternalBreach(RuntimeError):
    """An invariant of the elimination failed; carries the partial trace."""

    def __init__(self, msg: str, trace: Optional["Trace"] = None):
        super().__init__(msg)
        self.trace = trace


class ReplayMismatch(RuntimeError):
    pass


# -- systems ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Cong:
    """u . t^n . r ==[delta] b."""

    n: int
    r: OrePoly
    delta: Fraction
    b: Term


@dataclass
class PPSystem:
    var: str
    ring: SeriesRing
    equations: List[Tuple[OrePoly, Term]]
    congs: List[Cong]
    side: List[Atom] = dc_field(default_factory=list)

    @property
    def equation(self) -> Optional[Tuple[OrePoly, Term]]:
        return self.equations[0] if self.equations else None

    def copy(self, **kw) -> "PPSystem":
        data = dict(var=self.var, ring=self.ring, equations=list(self.equations), congs=list(self.congs), side=list(self.side))
        data.update(kw)
        return PPSystem(**data)

    def sepdeg(self) -> int:
        total = 0
        for r, _ in self.equations:
            if not r.is_zero():
                total += r.degree - r.t_adic_order()
        return total + sum(c.r.degree for c in self.congs if not c.r.is_zero())

    def is_closed(self) -> bool:
        return not self.equations and not self.congs

    def __str__(self) -> str:
        return format_system(self)


def format_system(s: PPSystem) -> str:
    u = s.var
    parts = [f"{u}*({format_ore(r)}) = {format_term(b)}" for r, b in s.equations]
    for c in s.congs:
        coeff = f"t^{c.n}*({format_ore(c.r)})" if c.n else f"({format_ore(c.r)})"
        parts.append(f"{u}*{coeff} ==[{fmt_delta(c.delta)}] {format_term(c.b)}")
    parts.extend(format_atom(a) for a in s.side)
    body = " & ".join(parts) if parts else "true"
    return f"E {u} . {body}" if (s.equations or s.congs) else body


# -- trace ---------------------------------------------------------------------------------


@dataclass
class Step:
    rule: str
    var: str
    before: str
    after: str
    thresholds: Dict[str, str]
    sepdeg: Tuple[int, int]
    note: str = ""

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "var": self.var,
            "before": self.before,
            "after": self.after,
            "thresholds": dict(self.thresholds),
            "sepdeg": list(self.sepdeg),
            "note": self.note,
        }


@dataclass
class Trace:
    input: str
    config: dict
    steps: List[Step] = dc_field(default_factory=list)
    result: str = ""
    index_note: str = ""

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "input": self.input,
            "config": dict(self.config),
            "steps": [s.to_json() for s in self.steps],
            "result": self.result,
            "index_note": self.index_note,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def rules(self) -> List[str]:
        return [s.rule for s in self.steps]


# -- helpers --------------------------------------------------------------------------------


def _const(ring: SeriesRing, c: SeriesElem) -> OrePoly:
    return OrePoly.const(ring, c)


def _scalar(q: OrePoly) -> SeriesElem:
    return q.coeff(0)


def _is_scalar(q: OrePoly) -> bool:
    return q.degree == 0


def substitute_scalar_solution(a: SeriesElem, b: Term, q: OrePoly) -> Tuple[Term, SeriesElem]:
    """For u.a = b (a scalar), return (X, c) with (u.q).c = X.

    q.c = a.h with c = prod sigma^i(a) (or c = 1 when a is a monomial), so
    (u.q).c = (u.a).h = b.h.  Everything stays exact.
    """
    ring = a.ring
    support = [i for i, x in enumerate(q.coeffs) if x.terms]
    if a.is_monomial() and a.is_exact():
        c = ring.one()
        h = [x * a.frob(i).invert() if x.terms else ring.zero() for i, x in enumerate(q.coeffs)]
        return b.mul(OrePoly(ring, h)), c
    frobs = {i: a.frob(i) for i in support}
    c = ring.one()
    for i in support:
        c = c * frobs[i]
    h = []
    for i, x in enumerate(q.coeffs):
        if not x.terms:
            h.append(ring.zero())
            continue
        prod = x
        for j in support:
            if j != i:
                prod = prod * frobs[j]
        h.append(prod)
    return b.mul(OrePoly(ring, h)), c


def apply_tf_claim(q: OrePoly, n: int, delta, direction: str = "forward") -> Fraction:
    """Threshold transfer u ==[delta] 0  <->  u.t^n.q ==[Upsilon^-1(q, tau^n(delta))] 0.

    forward maps the threshold on u to the one on u.t^n.q; backward inverts.
    Valid in torsion-free models only.
    """
    p = q.ring.p
    if direction == "forward":
        return upsilon_inv(q.profile(), tau(delta, n, p))
    if direction == "backward":
        return tau(upsilon(q.profile(), delta)[0], -n, p)
    raise ValueError(f"unknown direction {direction!r}")


def resolve_index(mode: str, polys: Sequence[OrePoly] = (), axioms: Optional[Sequence[str]] = None) -> str:
    """Annotation of how index sentences are settled under the chosen mode."""
    if mode == "torsion-free":
        return "torsion-free: every proper pp-inclusion has infinite index"
    if mode == "ttor":
        notes = []
        seen = set()
        for q in polys:
            key = format_ore(q)
            if key in seen or q.degree < 1:
                continue
            seen.add(key)
            notes.append(f"dim ann({key}) = {annihilator_dimension(q)}")
        return "T_tor: " + ("; ".join(notes) if notes else "no annihilators involved")
    if mode == "axioms":
        listed = list(axioms or [])
        if not listed:
            return "axioms: all annihilators trivial"
        return "axioms: nontrivial annihilators " + "; ".join(listed)
    raise ValueError(f"unknown mode {mode!r}")


def annihilator_dimension(q: OrePoly, cap: int = DEFAULT_EXTENSION_CAP) -> int:
    """Fix(sigma)-dimension of ann(q) in a large enough model.

    Constant coefficients are checked through the additive kernel after
    extending the residue field; otherwise the T_tor axiom value (the degree
    of the separable part) is returned.
    """
    _, qs = q.split_t()
    d = qs.degree
    field = qs.ring.field
    coeffs = []
    for c in qs.coeffs:
        if c.prec is not INF or len(c.terms) > 1 or (c.terms and c.terms[0][0] != 0):
            return d
        coeffs.append(c.terms[0][1] if c.terms else 0)
    try:
        big, emb = extend_until_kernel_full(coeffs, d, cap, field=field)
    except ExtensionCapError as exc:
        return exc.achieved
    return len(additive_kernel_ints(big, [emb(a) for a in coeffs]))


# -- the engine ---------------------------------------------------------------------------


class Eliminator:
    def __init__(self, ring: SeriesRing, mode: str = "ttor", expected: Optional[List[dict]] = None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.ring = ring
        self.mode = mode
        self.steps: List[Step] = []
        self.expected = expected
        self.polys: List[OrePoly] = []

    # recording ------------------------------------------------------------------------

    def record(self, rule: str, before: PPSystem, after, thresholds=None, note: str = "") -> None:
        th = {k: fmt_delta(v) for k, v in (thresholds or {}).items()}
        after_text = str(after)
        before_deg = before.sepdeg()
        after_deg = after.sepdeg() if isinstance(after, PPSystem) else 0
        step = Step(rule, before.var, str(before), after_text, th, (before_deg, after_deg), note)
        if self.expected is not None:
            k = len(self.steps)
            if k >= len(self.expected):
                raise ReplayMismatch(f"replay produced extra step {rule!r}")
            exp = self.expected[k]
            if exp.get("rule") != rule or exp.get("after") != after_text:
                raise ReplayMismatch(f"step {k}: expected {exp.get('rule')!r}, got {rule!r}")
        self.steps.append(step)

    def breach(self, msg: str):
        raise InternalBreach(msg, Trace("", {}, list(self.steps)))

    # formula level ------------------------------------------------------------------------

    def eliminate_formula(self, phi: PPFormula) -> QFFormula:
        atoms = list(phi.atoms)
        for var in reversed(phi.bound):
            atoms = self.eliminate_var(var, atoms, set(phi.bound))
        atoms, ok = simplify_atoms(atoms)
        if not ok:
            return QFFormula(self.ring, [], False)
        if self.mode == "torsion-free":
            atoms = self.tf_pass(atoms)
        return QFFormula(self.ring, atoms)

    def eliminate_var(self, var: str, atoms: List[Atom], taken: set) -> List[Atom]:
        atoms, comps = self.expand_lambda(var, atoms, taken)
        for c in comps:
            atoms = self.eliminate_single(c, atoms)
        return atoms

    def expand_lambda(self, var: str, atoms: List[Atom], taken: set) -> Tuple[List[Atom], List[str]]:
        ell = max((a.term.max_path(var) for a in atoms), default=0)
        if ell == 0:
            return atoms, [var]
        new_atoms, names = expand_lambda_atoms(self.ring, var, atoms, ell, taken)
        before = PPSystem(var, self.ring, [], [], [a for a in atoms])
        after = PPSystem(",".join(names), self.ring, [], [], new_atoms)
        self.record("lambda-expand", before, after, note=f"depth {ell}")
        return new_atoms, names

    # single variable ------------------------------------------------------------------------

    def build_system(self, var: str, atoms: List[Atom]) -> Tuple[PPSystem, List[Atom]]:
        eqs: List[Tuple[OrePoly, Term]] = []
        congs: List[Cong] = []
        rest_atoms: List[Atom] = []
        ring = self.ring
        for a in atoms:
            if not a.term.has_var(var):
                rest_atoms.append(a)
                continue
            q = None
            for (v, path), coeff in a.term.monos.items():
                if v != var:
                    continue
                if path:
                    self.breach(f"lambda path on {var} survived expansion")
                q = coeff
            b = -a.term.without([var])
            if a.kind == "eq":
                eqs.append((q, b))
            else:
                n, qs = q.split_t()
                congs.append(Cong(n, qs, a.delta, b))
        return PPSystem(var, ring, eqs, congs, []), rest_atoms

    def eliminate_single(self, var: str, atoms: List[Atom]) -> List[Atom]:
        s, rest = self.build_system(var, atoms)
        if s.is_closed():
            return rest
        last = None
        for _ in range(MAX_ITERATIONS):
            s = self.normalize(s)
            if s.is_closed():
                return rest + s.side
            deg = s.sepdeg()
            if last is not None and deg >= last:
                self.breach(f"separability degree did not decrease ({last} -> {deg})")
            last = deg
            out = self.iterate(s)
            if isinstance(out, list):
                return rest + out
            s = out
        self.breach("iteration limit reached")

    # normalization ------------------------------------------------------------------------

    def normalize(self, s: PPSystem) -> PPSystem:
        ring = self.ring
        # equations: split off t-powers, then fold into one
        if any(not r.is_separable() for r, _ in s.equations if not r.is_zero()):
            eqs: List[Tuple[OrePoly, Term]] = []
            side = list(s.side)
            for r, b in s.equations:
                if r.is_zero():
                    side.append(Atom.eq(b))
                    continue
                if r.is_separable():
                    eqs.append((r, b))
                    continue
                m, rp = r.split_t()
                comps = lambda_decompose_poly(rp, m)
                if recompose_lambda(comps, m) != OrePoly.t_power(ring, m) * rp:
                    self.breach("lambda decomposition failed to recompose")
                for path, comp in comps.items():
                    rhs = apply_lambda_path(path, b)
                    if comp.is_zero():
                        side.append(Atom.eq(rhs))
                    else:
                        eqs.append((comp, rhs))
            new = s.copy(equations=eqs, side=side)
            self.record("sepequation", s, new)
            s = new
        if len(s.equations) > 1 or any(r.is_zero() for r, _ in s.equations):
            eq, side = reduce_equations(s.equations)
            new = s.copy(equations=[eq] if eq else [], side=s.side + side)
            self.record("sep", s, new)
            s = new
        # normalization into I
        changed = False
        eqs = []
        for r, b in s.equations:
            if not r.in_I():
                mu, rn = r.normalize_to_I()
                eqs.append((rn, b.scale(mu)))
                changed = True
            else:
                eqs.append((r, b))
        congs = []
        side = list(s.side)
        for c in s.congs:
            if c.r.is_zero():
                side.append(Atom.cong(c.delta, -c.b))
                changed = True
                continue
            n, r = c.n, c.r
            if not r.is_separable():
                m, r = r.split_t()
                n += m
                changed = True
            if not r.in_I():
                mu, r = r.normalize_to_I()
                congs.append(Cong(n, r, c.delta + mu.valuation(), c.b.scale(mu)))
                changed = True
            else:
                congs.append(Cong(n, r, c.delta, c.b))
        if changed:
            new = s.copy(equations=eqs, congs=congs, side=side)
            self.record("normalizeI", s, new)
            s = new
        for r, _ in s.equations:
            self.polys.append(r)
        # terminal case: an equation of degree 0 determines u
        if s.equation is not None and s.equation[0].degree == 0:
            a, b0 = _scalar(s.equation[0]), s.equation[1]
            side = list(s.side)
            for c in s.congs:
                q = OrePoly.t_power(self.ring, c.n) * c.r
                X, k = substitute_scalar_solution(a, b0, q)
                side.append(Atom.cong(c.delta + k.valuation(), X - c.b.scale(k)))
            new = PPSystem(s.var, ring, [], [], side)
            self.record("sep", s, new, note="degree-0 equation eliminates the variable")
            s = new
        return s

    # main dispatch --------------------------------------------------------------------------

    def iterate(self, s: PPSystem):
        ring = self.ring
        if s.equation is not None and not s.congs:
            self.record("close", s, PPSystem(s.var, ring, [], [], s.side), note="separable equation is always solvable")
            return s.side
        if s.equation is None and len(s.congs) == 1:
            self.record("close", s, PPSystem(s.var, ring, [], [], s.side), note="single congruence is always solvable")
            return s.side
        n0 = max(c.n for c in s.congs)
        if n0 >= 1:
            return self.case_A(s, n0)
        if s.equation is None:
            s = self.harden(s, "caseB′")
        return self.case_B(s)

    def case_A(self, s: PPSystem, n0: int):
        ring = self.ring
        p = ring.p
        had_eq = s.equation is not None
        if had_eq and all(_is_scalar(c.r) for c in s.congs):
            return self.cas_constante(s, n0)
        if had_eq:
            s = self.cas6(s)
        if not had_eq:
            out = self.try_cas1(s)
            if out is not None:
                return out
            if all(_is_scalar(c.r) for c in s.congs):
                return self.chain(s, n0, "caseA′")
        congs = [
            Cong(0, c.r.pow_sigma(n0 - c.n), tau(c.delta, n0 - c.n, p), c.b.mul(OrePoly.t_power(ring, n0 - c.n)))
            for c in s.congs
        ]
        new = s.copy(congs=congs)
        self.record("caseA" if had_eq else "caseA′", s, new, {"n0": Fraction(n0)}, note=f"u.t^{n0} renamed {s.var}")
        return self.case_B(self.harden(new, "caseB′"))

    def cas6(self, s: PPSystem) -> PPSystem:
        p = self.ring.p
        r0, b0 = s.equation
        need = max(tau(upsilon(c.r.profile(), c.delta)[0], -c.n, p) for c in s.congs)
        delta = upsilon_inv(r0.profile(), need)
        new = s.copy(equations=[], congs=[Cong(0, r0, delta, b0)] + list(s.congs))
        self.record("cas6", s, new, {"delta": delta, "mu": need}, note="equation relaxed to a congruence")
        return new

    def harden(self, s: PPSystem, rule: str) -> PPSystem:
        vals = [upsilon(c.r.profile(), c.delta)[0] for c in s.congs]
        k = max(range(len(vals)), key=lambda i: (vals[i], -i))
        c = s.congs[k]
        congs = [x for i, x in enumerate(s.congs) if i != k]
        if c.n:
            self.breach("hardening a congruence with a t-power")
        new = s.copy(equations=[(c.r, c.b)], congs=congs)
        self.record(rule, s, new, {"upsilon_max": vals[k]}, note=f"cas3: congruence {k} hardened")
        return new

    def case_B(self, s: PPSystem):
        r0, b0 = s.equation
        # degree reduction against the equation
        for k, c in enumerate(s.congs):
            if c.r.degree >= r0.degree:
                a, _, quo, rem = generalized_right_divide(c.r, r0)
                # r_k a = r0 quo + rem, so u.rem = u.r_k a - b0.quo
                b = c.b.scale(a) - b0.mul(quo)
                congs = list(s.congs)
                congs[k] = Cong(0, rem, c.delta + a.valuation(), b)
                new = s.copy(congs=congs)
                self.record("degree-reduce", s, new, {"delta": c.delta + a.valuation()}, note=f"congruence {k}")
                return new
        vals = [upsilon(c.r.profile(), c.delta)[0] for c in s.congs]
        k = max(range(len(vals)), key=lambda i: (vals[i], -i))
        c = s.congs[k]
        lam, _, quo, rem = generalized_right_divide(r0, c.r)
        r0l = r0.scale_right(lam)
        delta = upsilon_inv(r0l.profile(), vals[k])
        if upsilon(r0l.profile(), delta)[0] != vals[k]:
            self.breach("Upsilon(r0*lambda, delta) differs from the hardened value")
        b = b0.scale(lam) - c.b.mul(quo)
        congs = [x for i, x in enumerate(s.congs) if i != k]
        side = list(s.side)
        if rem.is_zero():
            side.append(Atom.cong(delta, b))
        else:
            congs.append(Cong(0, rem, delta, b))
        new = s.copy(equations=[(c.r, c.b)], congs=congs, side=side)
        if new.sepdeg() >= s.sepdeg():
            self.breach("cas2 did not lower the separability degree")
        self.record("caseB", s, new, {"delta": delta, "upsilon_max": vals[k]}, note=f"cas2 against congruence {k}")
        return new

    def try_cas1(self, s: PPSystem):
        if s.equation is not None or len(s.congs) != 2:
            return None
        one = OrePoly.one(self.ring)
        for i in (0, 1):
            c1, c2 = s.congs[i], s.congs[1 - i]
            if c1.n == 1 and c1.r == one and c2.n == 0 and c2.r.degree >= 1:
                p = self.ring.p
                rs = c2.r.pow_sigma(1)
                left = upsilon_inv(rs.profile(), c1.delta)
                right = tau(c2.delta, 1, p)
                mu3 = min(left, right)
                branch = "(i)" if left >= right else "(ii)"
                atom = Atom.cong(mu3, c1.b.mul(rs) - c2.b.mul(OrePoly.t_power(self.ring, 1)))
                out = s.side + [atom]
                self.record(
                    "cas1", s, PPSystem(s.var, self.ring, [], [], out),
                    {"mu1": c1.delta, "mu2": c2.delta, "mu3": mu3}, note=f"branch {branch}",
                )
                return out
        return None

    def chain(self, s: PPSystem, n0: int, rule: str, extra=None, note: str = "scalar congruences: ball chain") -> List[Atom]:
        ring = self.ring
        p = ring.p
        items = []
        for i, c in enumerate(s.congs):
            D = tau(c.delta, n0 - c.n, p)
            B = c.b.mul(OrePoly.t_power(ring, n0 - c.n))
            sc = _scalar(c.r).frob(n0 - c.n)
            items.append((D, i, B, sc))
        items.sort(key=lambda x: (x[0], x[1]))
        atoms = list(s.side)
        th = {}
        for (D1, i1, B1, s1), (D2, i2, B2, s2) in zip(items, items[1:]):
            atoms.append(Atom.cong(D1, B1.scale(s2) - B2.scale(s1)))
            th[f"D{i1}"] = D1
        if extra:
            atoms.extend(extra[0])
            th.update(extra[1])
        self.record(rule, s, PPSystem(s.var, ring, [], [], atoms), th, note=note)
        return atoms

    def cas_constante(self, s: PPSystem, n0: int) -> List[Atom]:
        ring = self.ring
        p = ring.p
        r0, b0 = s.equation
        need = max(tau(upsilon(c.r.profile(), c.delta)[0], -c.n, p) for c in s.congs)
        dprime = upsilon_inv(r0.profile(), need)
        R = r0.pow_sigma(n0)
        D0 = tau(dprime, n0, p)
        B0 = b0.mul(OrePoly.t_power(ring, n0))
        best = None
        for i, c in enumerate(s.congs):
            D = tau(c.delta, n0 - c.n, p)
            if best is None or D > best[0]:
                best = (D, i, c.b.mul(OrePoly.t_power(ring, n0 - c.n)), _scalar(c.r).frob(n0 - c.n))
        Dstar, istar, Bstar, sstar = best
        E = min(D0, upsilon_inv(R.profile(), Dstar))
        X, k = substitute_scalar_solution(sstar, Bstar, R)
        main = Atom.cong(E + k.valuation(), X - B0.scale(k))
        rest = s.copy(equations=[])
        return self.chain(
            rest, n0, "cas_constante",
            extra=([main], {"delta_prime": dprime, "delta": E, "D_max": Dstar}),
            note="branch (i)" if E == D0 else "branch (ii)",
        )

    # torsion-free post-pass ---------------------------------------------------------------------

    def tf_pass(self, atoms: List[Atom]) -> List[Atom]:
        out = []
        for a in atoms:
            t = a.term
            if a.kind == "cong" and len(t.monos) == 1 and t.const.is_zero():
                (key, q), = t.monos.items()
                if not q.is_zero() and q.degree >= 0 and not (q.degree == 0 and q == OrePoly.one(self.ring)):
                    n, qs = q.split_t()
                    mu, qn = qs.normalize_to_I()
                    d = a.delta + mu.valuation()
                    new_delta = apply_tf_claim(qn, n, d, "backward")
                    new = Atom.cong(new_delta, Term(self.ring, {key: OrePoly.one(self.ring)}))
                    before = PPSystem("", self.ring, [], [], [a])
                    self.record("tf", before, PPSystem("", self.ring, [], [], [new]), {"delta": new_delta})
                    out.append(new)
                    continue
            out.append(a)
        return out


def expand_lambda_atoms(ring: SeriesRing, var: str, atoms: List[Atom], ell: int, taken: set) -> Tuple[List[Atom], List[str]]:
    """Replace var by sum_d var_d . t^ell . c_d (one variable, var . t^ell, when n = 1)."""
    n = ring.n
    if n == 1:
        value = Term.var(ring, var, (), OrePoly.t_power(ring, ell))
        return [a.map_term(lambda t: t.substitute(var, value)) for a in atoms], [var]
    used = set(taken)
    for a in atoms:
        used.update(a.variables())
    from .ore_poly import _paths, basis_exponent

    names = []
    value = Term.zero(ring)
    for path in _paths(n, ell):
        name = f"{var}_{''.join(str(d) for d in path)}"
        while name in used:
            name += "_"
        used.add(name)
        names.append(name)
        c = ring.monomial(1, basis_exponent(path, ring.p))
        value = value + Term.var(ring, name, (), OrePoly.t_power(ring, ell, c))
    out = [a.map_term(lambda t: t.substitute(var, value)) for a in atoms]
    return out, names


def expand_lambda_quantifier(phi: PPFormula) -> PPFormula:
    """Split every bound variable carrying lambda paths into its components."""
    atoms = list(phi.atoms)
    bound: List[str] = []
    taken = set(phi.bound)
    for var in phi.bound:
        ell = max((a.term.max_path(var) for a in atoms), default=0)
        if ell == 0:
            bound.append(var)
            continue
        atoms, names = expand_lambda_atoms(phi.ring, var, atoms, ell, taken)
        taken.update(names)
        bound.extend(names)
    return PPFormula(phi.ring, bound, atoms)


def reduce_equations(eqs: Sequence[Tuple[OrePoly, Term]]) -> Tuple[Optional[Tuple[OrePoly, Term]], List[Atom]]:
    """Fold several equations in u into one with a separable coefficient plus parameter atoms."""
    side: List[Atom] = []
    live = []
    for r, b in eqs:
        if r.is_zero():
            side.append(Atom.eq(b))
        else:
            live.append((r, b))
    if not live:
        return None, side
    seps = [i for i, (r, _) in enumerate(live) if r.is_separable()]
    if not seps:
        raise ValueError("reduce_equations needs a separable coefficient")
    cur = live[seps[0]]
    others = [e for i, e in enumerate(live) if i != seps[0]]
    for other in others:
        A, B = cur, other  # A separable
        while True:
            if B[0].is_zero():
                side.append(Atom.eq(B[1]))
                cur = A
                break
            if A[0].degree >= B[0].degree:
                a, _, c, rem = generalized_right_divide(A[0], B[0])
                new = (rem, A[1].scale(a) - B[1].mul(c))
                if B[0].is_separable():
                    A, B = B, new
                else:
                    # rem keeps A's nonzero constant coefficient
                    A, B = new, B
                    if rem.is_zero() or not rem.is_separable():
                        raise AssertionError("separable remainder expected")
            else:
                a, _, c, rem = generalized_right_divide(B[0], A[0])
                B = (rem, B[1].scale(a) - A[1].mul(c))
    return cur, side


# -- public entry points ---------------------------------------------------------------------


def config_of(ring: SeriesRing, mode: str) -> dict:
    return {"field": ring.field.spec(), "lattice": ring.lattice.spec(), "mode": mode}


def eliminate(phi: PPFormula, mode: str = "ttor", axioms: Optional[Sequence[str]] = None) -> Tuple[QFFormula, Trace]:
    eng = Eliminator(phi.ring, mode)
    trace = Trace(str(phi), config_of(phi.ring, mode))
    try:
        out = eng.eliminate_formula(phi)
    except InternalBreach as exc:
        trace.steps = list(eng.steps)
        exc.trace = trace
        raise
    out.index_note = resolve_index(mode, eng.polys, axioms)
    trace.steps = eng.steps
    trace.result = str(out)
    trace.index_note = out.index_note
    return out, trace


def eliminate_text(ring: SeriesRing, text: str, mode: str = "ttor") -> Tuple[QFFormula, Trace]:
    return eliminate(parse_formula(ring, text), mode)


def ring_from_config(config: dict) -> SeriesRing:
    from .coeff_field import parse_field_spec
    from .series_field import ExponentLattice

    return SeriesRing(parse_field_spec(config["field"]), ExponentLattice.parse(config["lattice"]))


def replay(trace_text: str, axioms: Optional[Sequence[str]] = None) -> Tuple[bool, str]:
    """Re-run the recorded elimination; (identical, regenerated text)."""
    data = json.loads(trace_text)
    if data.get("schema") != SCHEMA:
        raise ValueError(f"unsupported trace schema {data.get('schema')!r}")
    ring = ring_from_config(data["config"])
    phi = parse_formula(ring, data["input"])
    mode = data["config"]["mode"]
    eng = Eliminator(ring, mode, expected=data["steps"])
    out = eng.eliminate_formula(phi)
    if len(eng.steps) != len(data["steps"]):
        raise ReplayMismatch("replay produced fewer steps")
    out.index_note = resolve_index(mode, eng.polys, axioms)
    trace = Trace(str(phi), config_of(ring, mode), eng.steps, str(out), out.index_note)
    text = trace.dumps()
    return text == trace_text, text
