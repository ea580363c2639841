"""Terms, atoms and formulas of the module language with lambda-functions.

A term is a finite sum of monomials L_P(x) * q, where x is a variable, P a
lambda path and q an Ore polynomial acting on the right, plus a constant
series.  The path (d1, ..., dm) denotes lambda_d1 o ... o lambda_dm, printed
as 'Ld1...dm(x)'.  Atoms are equations 'term = 0' and congruences
'V[delta](term)'.

Lambda applied to a compound term is pushed to the variables with

    lambda_i(y . q) = sum_k lambda_k(y) . Q_ik,   Q_ik = sum_j t^j lambda_i(T^(k p^j) a_j)

and the sum  sum_k lambda_k(y) . (t T^k Q)  is folded back into  y . Q.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .ore_poly import OreParser, OrePoly, RESERVED, module_apply
from .series_field import (
    ParseError,
    SeriesElem,
    SeriesRing,
    TokenStream,
    format_series,
    parse_rational,
)
from .value_geometry import INF, DeltaPoint, as_delta, fmt_delta

Path = Tuple[int, ...]
Key = Tuple[str, Path]

_LPATH = re.compile(r"L(\d+)")
KEYWORDS = ("E", "V", "true", "false")


def is_var_name(name: str) -> bool:
    return name not in RESERVED and name not in KEYWORDS and not _LPATH.fullmatch(name)


class Term:
    """Immutable canonical term: {(var, path): OrePoly} plus a constant."""

    __slots__ = ("ring", "monos", "const")

    def __init__(self, ring: SeriesRing, monos: Mapping[Key, OrePoly] = (), const: Optional[SeriesElem] = None):
        self.ring = ring
        clean = {}
        for k, q in dict(monos).items():
            if not q.is_zero():
                clean[k] = q
        self.monos: Dict[Key, OrePoly] = dict(sorted(clean.items(), key=lambda kv: (kv[0][0], len(kv[0][1]), kv[0][1])))
        self.const = ring.zero() if const is None else const

    # constructors ----------------------------------------------------------------

    @classmethod
    def var(cls, ring: SeriesRing, name: str, path: Path = (), coeff: Optional[OrePoly] = None) -> "Term":
        return cls(ring, {(name, tuple(path)): coeff if coeff is not None else OrePoly.one(ring)})

    @classmethod
    def constant(cls, ring: SeriesRing, c) -> "Term":
        return cls(ring, {}, ring.coerce(c))

    @classmethod
    def zero(cls, ring: SeriesRing) -> "Term":
        return cls(ring)

    # structure -----------------------------------------------------------------------

    def variables(self) -> List[str]:
        return sorted({v for v, _ in self.monos})

    def has_var(self, name: str) -> bool:
        return any(v == name for v, _ in self.monos)

    def is_zero(self) -> bool:
        return not self.monos and self.const.is_zero()

    def is_constant(self) -> bool:
        return not self.monos

    def part(self, names: Iterable[str]) -> "Term":
        names = set(names)
        return Term(self.ring, {k: q for k, q in self.monos.items() if k[0] in names})

    def without(self, names: Iterable[str]) -> "Term":
        names = set(names)
        return Term(self.ring, {k: q for k, q in self.monos.items() if k[0] not in names}, self.const)

    def __eq__(self, other) -> bool:
        return isinstance(other, Term) and self.monos == other.monos and self.const == other.const

    def __hash__(self) -> int:
        return hash((tuple(self.monos.items()), self.const))

    def __repr__(self) -> str:
        return f"Term({format_term(self)})"

    def __str__(self) -> str:
        return format_term(self)

    # arithmetic ------------------------------------------------------------------------

    def __add__(self, other: "Term") -> "Term":
        monos = dict(self.monos)
        for k, q in other.monos.items():
            monos[k] = monos[k] + q if k in monos else q
        return Term(self.ring, monos, self.const + other.const)

    def __neg__(self) -> "Term":
        return Term(self.ring, {k: -q for k, q in self.monos.items()}, -self.const)

    def __sub__(self, other: "Term") -> "Term":
        return self + (-other)

    def mul(self, q: OrePoly) -> "Term":
        """term . q (right action)."""
        return Term(self.ring, {k: c * q for k, c in self.monos.items()}, module_apply(self.const, q))

    def scale(self, mu: SeriesElem) -> "Term":
        return self.mul(OrePoly.const(self.ring, mu))

    def substitute(self, name: str, value: "Term") -> "Term":
        """Replace every L_P(name) by L_P(value)."""
        out = Term(self.ring, {k: q for k, q in self.monos.items() if k[0] != name}, self.const)
        for (v, path), q in self.monos.items():
            if v == name:
                out = out + apply_lambda_path(path, value).mul(q)
        return out

    def evaluate(self, assignment: Mapping[str, SeriesElem]) -> SeriesElem:
        total = self.const
        for (v, path), q in self.monos.items():
            if v not in assignment:
                raise KeyError(f"unassigned variable {v!r}")
            x = assignment[v].lam_path(path) if path else assignment[v]
            total = total + module_apply(x, q)
        return total

    def max_path(self, name: str) -> int:
        return max((len(p) for v, p in self.monos if v == name), default=0)


# -- lambda pushing ---------------------------------------------------------------------


def _lambda_matrix(q: OrePoly, i: int) -> Dict[int, OrePoly]:
    """{k: Q_ik} with lambda_i(y.q) = sum_k lambda_k(y) . Q_ik."""
    ring = q.ring
    p, n = ring.p, ring.n
    out = {}
    for k in range(n):
        coeffs = []
        for j, a in enumerate(q.coeffs):
            shifted = a.shift(k * p ** j) if k else a
            coeffs.append(shifted.lam(i))
        Q = OrePoly(ring, coeffs)
        if not Q.is_zero():
            out[k] = Q
    return out


def apply_lambda(i: int, term: Term) -> Term:
    ring = term.ring
    if not 0 <= i < ring.n:
        raise IndexError(f"lambda index {i} out of range for basis size {ring.n}")
    monos: Dict[Key, OrePoly] = {}
    for (v, path), q in term.monos.items():
        for k, Q in _lambda_matrix(q, i).items():
            key = (v, (k,) + path)
            monos[key] = monos[key] + Q if key in monos else Q
    return recombine(Term(ring, monos, term.const.lam(i)))


def apply_lambda_path(path: Path, term: Term) -> Term:
    out = term
    for i in reversed(tuple(path)):
        out = apply_lambda(i, out)
    return out


def _left_strip_t(q: OrePoly) -> Optional[OrePoly]:
    """Q with q = t * Q, or None."""
    if q.is_zero() or q.coeffs[0].terms or q.coeffs[0].prec is not INF:
        return None
    return OrePoly(q.ring, q.coeffs[1:])


def recombine(term: Term) -> Term:
    """Fold sum_k L_(k,P)(x) . (t T^k Q) into L_P(x) . Q wherever possible."""
    ring = term.ring
    n = ring.n
    monos = dict(term.monos)
    changed = True
    while changed:
        changed = False
        for (v, path) in sorted(monos, key=lambda kv: (-len(kv[1]), kv)):
            if not path or (v, path) not in monos:
                continue
            rest = path[1:]
            keys = [(v, (k,) + rest) for k in range(n)]
            if not all(k in monos for k in keys):
                continue
            Q = _left_strip_t(monos[keys[0]])
            if Q is None:
                continue
            ok = all(
                monos[keys[k]] == OrePoly.t_power(ring, 1, ring.monomial(1, k)) * Q for k in range(1, n)
            )
            if not ok:
                continue
            for k in keys:
                del monos[k]
            key = (v, rest)
            monos[key] = monos[key] + Q if key in monos else Q
            if monos[key].is_zero():
                del monos[key]
            changed = True
            break
    return Term(ring, monos, term.const)


def normalize_lambda(term: Term) -> Term:
    """Canonical form: lambda only on variables, folded sums recombined."""
    return recombine(term)


# -- atoms and formulas --------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    kind: str  # "eq" or "cong"
    term: Term
    delta: Optional[DeltaPoint] = None

    def __post_init__(self):
        if self.kind == "cong":
            if self.delta is None or self.delta is INF:
                raise ValueError("congruence threshold must be finite")
        elif self.kind != "eq":
            raise ValueError(f"unknown atom kind {self.kind!r}")

    @classmethod
    def eq(cls, term: Term) -> "Atom":
        return cls("eq", term)

    @classmethod
    def cong(cls, delta, term: Term) -> "Atom":
        return cls("cong", term, as_delta(delta))

    def variables(self) -> List[str]:
        return self.term.variables()

    def map_term(self, fn) -> "Atom":
        return Atom(self.kind, fn(self.term), self.delta)

    def __str__(self) -> str:
        return format_atom(self)

    def evaluate(self, assignment: Mapping[str, SeriesElem]) -> Optional[bool]:
        """True, False, or None when undecided at the known precision."""
        val = self.term.evaluate(assignment)
        if self.kind == "eq":
            if val.terms:
                return False
            return True
        if val.terms:
            return val.terms[0][0] >= self.delta
        return True if val.prec >= self.delta else None

    def trivially_true(self) -> bool:
        if self.term.is_zero():
            return True
        if self.kind == "cong" and self.term.is_constant():
            return self.term.const.vlow() >= self.delta and (
                self.term.const.terms or self.term.const.prec >= self.delta
            )
        return False

    def trivially_false(self) -> bool:
        if not self.term.is_constant():
            return False
        c = self.term.const
        if self.kind == "eq":
            return bool(c.terms)
        return bool(c.terms) and c.terms[0][0] < self.delta


@dataclass
class PPFormula:
    ring: SeriesRing
    bound: List[str]
    atoms: List[Atom]

    def free_vars(self) -> List[str]:
        names = set()
        for a in self.atoms:
            names.update(a.variables())
        return sorted(names - set(self.bound))

    def __str__(self) -> str:
        return format_pp(self)


@dataclass
class QFFormula:
    ring: SeriesRing
    atoms: List[Atom]
    truth: Optional[bool] = None  # False: the formula is the constant false
    index_note: str = ""

    def __str__(self) -> str:
        return format_qf(self)

    def is_true(self) -> bool:
        return self.truth is not False and not self.atoms

    def evaluate(self, assignment: Mapping[str, SeriesElem]) -> Optional[bool]:
        if self.truth is False:
            return False
        result: Optional[bool] = True
        for a in self.atoms:
            r = a.evaluate(assignment)
            if r is False:
                return False
            if r is None:
                result = None
        return result

    def variables(self) -> List[str]:
        names = set()
        for a in self.atoms:
            names.update(a.variables())
        return sorted(names)


def simplify_atoms(atoms: Sequence[Atom]) -> Tuple[List[Atom], bool]:
    """Drop trivially true atoms and duplicates; report a trivially false one."""
    out: List[Atom] = []
    seen = set()
    for a in atoms:
        if a.trivially_true():
            continue
        if a.trivially_false():
            return [], False
        key = str(a)
        if key in seen:
            continue
        seen.add(key)
        out.append(a)
    return out, True


# -- printing ---------------------------------------------------------------------------


def format_path(path: Path) -> str:
    return "L" + "".join(str(d) for d in path)


def format_term(term: Term) -> str:
    parts = []
    for (v, path), q in term.monos.items():
        base = f"{format_path(path)}({v})" if path else v
        if q == OrePoly.one(term.ring):
            parts.append(base)
        else:
            parts.append(f"{base}*({q})")
    if not term.const.is_zero():
        parts.append(f"({format_series(term.const)})")
    return " + ".join(parts) if parts else "0"


def format_atom(a: Atom) -> str:
    if a.kind == "eq":
        return f"{format_term(a.term)} = 0"
    return f"V[{fmt_delta(a.delta)}]({format_term(a.term)})"


def format_pp(f: PPFormula) -> str:
    body = " & ".join(format_atom(a) for a in f.atoms) if f.atoms else "true"
    if f.bound:
        return f"E {' '.join(f.bound)} . {body}"
    return body


def format_qf(f: QFFormula) -> str:
    if f.truth is False:
        return "false"
    if not f.atoms:
        return "true"
    return " & ".join(format_atom(a) for a in f.atoms)


# -- parsing ----------------------------------------------------------------------------


class FormulaParser:
    def __init__(self, ring: SeriesRing, text: str):
        self.ring = ring
        self.ts = TokenStream(text)

    def formula(self) -> PPFormula:
        ts = self.ts
        bound: List[str] = []
        if ts.peek()[1] == "E" and ts.peek()[0] == "name":
            ts.next()
            while not ts.at("."):
                kind, val, pos = ts.next()
                if kind == "end":
                    raise ParseError("expected '.' after bound variables", ts.text, pos)
                if val == ",":
                    continue
                if kind != "name" or not is_var_name(val):
                    raise ParseError(f"bad variable name {val!r}", ts.text, pos)
                if val in bound:
                    raise ParseError(f"variable {val!r} bound twice", ts.text, pos)
                bound.append(val)
            ts.expect(".")
        atoms = self.conj()
        if not ts.done():
            raise ts.error(f"trailing input {ts.peek()[1]!r}")
        used = set()
        for a in atoms:
            used.update(a.variables())
        return PPFormula(self.ring, [v for v in bound if v in used], atoms)

    def conj(self) -> List[Atom]:
        ts = self.ts
        if ts.peek()[1] == "true" and ts.peek()[0] == "name":
            ts.next()
            return []
        atoms = [self.atom()]
        while ts.at("&"):
            ts.next()
            atoms.append(self.atom())
        return atoms

    def atom(self) -> Atom:
        ts = self.ts
        kind, val, pos = ts.peek()
        if kind == "name" and val == "V" and ts.peek(1)[1] == "[":
            ts.next()
            ts.expect("[")
            delta = parse_rational(ts)
            ts.expect("]")
            ts.expect("(")
            term = self.term()
            ts.expect(")")
            return Atom.cong(delta, term)
        lhs = self.term()
        if ts.at("=") and ts.peek(1)[1] == "=":
            ts.next()
            ts.next()
            ts.expect("[")
            delta = parse_rational(ts)
            ts.expect("]")
            rhs = self.term()
            return Atom.cong(delta, lhs - rhs)
        ts.expect("=")
        rhs = self.term()
        return Atom.eq(lhs - rhs)

    def term(self) -> Term:
        ts = self.ts
        neg = False
        if ts.at("-"):
            ts.next()
            neg = True
        acc = self.monomial()
        if neg:
            acc = -acc
        while ts.at("+") or ts.at("-"):
            op = ts.next()[1]
            m = self.monomial()
            acc = acc + m if op == "+" else acc - m
        return acc

    def _coeff_chain(self) -> OrePoly:
        ts = self.ts
        ts.expect("*")
        return OreParser(self.ring, ts).term()

    def monomial(self) -> Term:
        ts = self.ts
        kind, val, pos = ts.peek()
        ring = self.ring
        if kind == "name" and _LPATH.fullmatch(val) and ts.peek(1)[1] == "(":
            path = tuple(int(d) for d in val[1:])
            for d in path:
                if d >= ring.n:
                    raise ParseError(f"lambda index {d} out of range for basis size {ring.n}", ts.text, pos)
            ts.next()
            ts.expect("(")
            inner = self.term()
            ts.expect(")")
            t = apply_lambda_path(path, inner)
            if ts.at("*"):
                t = t.mul(self._coeff_chain())
            return t
        if kind == "name" and is_var_name(val):
            ts.next()
            t = Term.var(ring, val)
            if ts.at("*"):
                t = t.mul(self._coeff_chain())
            return t
        if kind == "end":
            raise ParseError("unexpected end of input", ts.text, pos)
        q = OreParser(ring, ts).term()
        if q.degree > 0:
            raise ParseError("constant literal may not contain t", ts.text, pos)
        c = q.coeff(0) if q.coeffs else ring.zero()
        return Term.constant(ring, c)


def parse_formula(ring: SeriesRing, text: str) -> PPFormula:
    return FormulaParser(ring, text).formula()


def parse_term(ring: SeriesRing, text: str) -> Term:
    p = FormulaParser(ring, text)
    t = p.term()
    if not p.ts.done():
        raise p.ts.error(f"trailing input {p.ts.peek()[1]!r}")
    return t


def parse_qf(ring: SeriesRing, text: str) -> QFFormula:
    s = text.strip()
    if s == "false":
        return QFFormula(ring, [], False)
    f = parse_formula(ring, s)
    if f.bound:
        raise ParseError("quantifier-free formula expected", text, 0)
    return QFFormula(ring, f.atoms)
