"""Truncated generalized power series over a finite field.

An element is a finite sum of terms c*T^e with rational exponents e in an
exponent lattice, plus a precision N: the element is known modulo terms of
exponent >= N.  N = INF means the element is exact.

Two lattice kinds are provided.  The full kind allows every rational
exponent, so the model is perfect and the only lambda-function is the
inverse Frobenius.  The tame kind allows exponents in Z[1/l] with l coprime
to p; the p-basis is {1, T, ..., T^(p-1)} and there are p lambda-functions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .coeff_field import FiniteField, FiniteFieldElem, get_field
from .value_geometry import INF, DeltaPoint, as_delta


class PrecisionError(ArithmeticError):
    """An operation needs information below the known precision."""


class LatticeDefect(ArithmeticError):
    """An exponent required by a computation lies outside the lattice."""

    def __init__(self, msg: str, exponent: Optional[Fraction] = None):
        super().__init__(msg)
        self.exponent = exponent


@dataclass(frozen=True)
class Unknown:
    """Valuation marker for a term-free element of finite precision."""

    below: Fraction

    def __str__(self) -> str:
        return f"unknown below {self.below}"


@dataclass(frozen=True)
class ExponentLattice:
    kind: str  # "full" or "tame"
    ell: int = 1

    def __post_init__(self):
        if self.kind not in ("full", "tame"):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.ell < 1:
            raise ValueError("lattice parameter must be positive")

    @classmethod
    def parse(cls, text: str) -> "ExponentLattice":
        s = text.strip().lower()
        if s in ("full", "q", "full-q"):
            return cls("full")
        m = re.fullmatch(r"tame(?::(\d+))?", s)
        if m:
            return cls("tame", int(m.group(1) or 1))
        raise ValueError(f"bad lattice spec {text!r} (use 'full' or 'tame:L')")

    def spec(self) -> str:
        return "full" if self.kind == "full" else f"tame:{self.ell}"

    def contains(self, e: Fraction) -> bool:
        if self.kind == "full":
            return True
        d = e.denominator
        g = self.ell
        while d > 1:
            h = math.gcd(d, g)
            if h == 1:
                return False
            d //= h
        return True


class SeriesRing:
    """The series model over a coefficient field and an exponent lattice."""

    def __init__(self, field: FiniteField, lattice: ExponentLattice = ExponentLattice("full")):
        if lattice.kind == "tame" and lattice.ell % field.p == 0:
            raise ValueError("tame lattice parameter must be coprime to p")
        self.field = field
        self.lattice = lattice
        self.p = field.p
        self.n = 1 if lattice.kind == "full" else field.p

    def __eq__(self, other) -> bool:
        return isinstance(other, SeriesRing) and (self.field, self.lattice) == (other.field, other.lattice)

    def __hash__(self) -> int:
        return hash((self.field, self.lattice))

    def __repr__(self) -> str:
        return f"SeriesRing({self.field.spec()}, {self.lattice.spec()})"

    def with_field(self, field: FiniteField) -> "SeriesRing":
        return SeriesRing(field, self.lattice)

    # constructors --------------------------------------------------------------

    def make(self, terms: Iterable[Tuple[Fraction, int]], prec: DeltaPoint = INF) -> "SeriesElem":
        acc: Dict[Fraction, int] = {}
        add = self.field.add
        for e, c in terms:
            if c:
                e = Fraction(e)
                acc[e] = add(acc.get(e, 0), c)
        return self._from_dict(acc, prec)

    def _from_dict(self, acc: Dict[Fraction, int], prec: DeltaPoint) -> "SeriesElem":
        prec = as_delta(prec)
        items = sorted((e, c) for e, c in acc.items() if c and e < prec)
        for e, _ in items:
            if not self.lattice.contains(e):
                raise LatticeDefect(f"exponent {e} outside lattice {self.lattice.spec()}", e)
        return SeriesElem(self, tuple(items), prec)

    def zero(self, prec: DeltaPoint = INF) -> "SeriesElem":
        return SeriesElem(self, (), as_delta(prec))

    def one(self) -> "SeriesElem":
        return SeriesElem(self, ((Fraction(0), 1),), INF)

    def scalar(self, c: Union[int, FiniteFieldElem]) -> "SeriesElem":
        if isinstance(c, FiniteFieldElem):
            c = c.value
        return self.make([(Fraction(0), c)])

    def from_int(self, n: int) -> "SeriesElem":
        return self.scalar(self.field.from_int(n))

    def monomial(self, c: Union[int, FiniteFieldElem], e, prec: DeltaPoint = INF) -> "SeriesElem":
        if isinstance(c, FiniteFieldElem):
            c = c.value
        return self.make([(Fraction(e), c)], prec)

    @property
    def T(self) -> "SeriesElem":
        return self.monomial(1, 1)

    def coerce(self, x) -> "SeriesElem":
        if isinstance(x, SeriesElem):
            if x.ring != self:
                raise ValueError("series from a different ring")
            return x
        if isinstance(x, int):
            return self.from_int(x)
        if isinstance(x, FiniteFieldElem):
            return self.scalar(x)
        if isinstance(x, str):
            return parse_series(self, x)
        raise TypeError(f"cannot coerce {x!r} into {self!r}")

    # lattice helpers -------------------------------------------------------------

    def coset(self, e: Fraction) -> int:
        """Index i in {0..n-1} with e - i in p * lattice (tame kind); always 0 in full kind."""
        if self.n == 1:
            return 0
        e = Fraction(e)
        return (e.numerator * pow(e.denominator, -1, self.p)) % self.p

    def p_divisible(self, e: Fraction) -> bool:
        return self.n == 1 or self.coset(e) == 0

    def embed(self, x: "SeriesElem", emb, big_ring: "SeriesRing") -> "SeriesElem":
        """Image of x under a coefficient field embedding."""
        return SeriesElem(big_ring, tuple((e, emb(c)) for e, c in x.terms), x.prec)

    def parse(self, text: str) -> "SeriesElem":
        return parse_series(self, text)


class SeriesElem:
    """Immutable truncated series; terms sorted by exponent, no zero coefficients."""

    __slots__ = ("ring", "terms", "prec")

    def __init__(self, ring: SeriesRing, terms: Tuple[Tuple[Fraction, int], ...], prec: DeltaPoint):
        self.ring = ring
        self.terms = terms
        self.prec = prec

    # structure --------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms and self.prec is INF
        if not isinstance(other, SeriesElem):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms and self.prec == other.prec

    def __hash__(self) -> int:
        return hash((self.terms, self.prec))

    def __repr__(self) -> str:
        return f"SeriesElem({format_series(self)})"

    def __str__(self) -> str:
        return format_series(self)

    @property
    def field(self) -> FiniteField:
        return self.ring.field

    def is_exact(self) -> bool:
        return self.prec is INF

    def is_zero(self) -> bool:
        """Exactly zero (no terms, infinite precision)."""
        return not self.terms and self.prec is INF

    def is_termfree(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def valuation(self):
        if self.terms:
            return self.terms[0][0]
        if self.prec is INF:
            return INF
        return Unknown(self.prec)

    def vlow(self) -> DeltaPoint:
        """Valuation, or the precision when no term is known (a lower bound)."""
        return self.terms[0][0] if self.terms else self.prec

    def val(self) -> DeltaPoint:
        """Valuation, raising PrecisionError when unknown."""
        if self.terms:
            return self.terms[0][0]
        if self.prec is INF:
            return INF
        raise PrecisionError(f"valuation unknown below {self.prec}")

    def leading(self) -> Tuple[Fraction, int]:
        if not self.terms:
            raise PrecisionError("no leading term")
        return self.terms[0]

    def coeff(self, e) -> int:
        e = Fraction(e)
        if e >= self.prec:
            raise PrecisionError(f"coefficient at {e} beyond precision {self.prec}")
        for ee, c in self.terms:
            if ee == e:
                return c
        return 0

    def residue(self) -> FiniteFieldElem:
        v = self.vlow()
        if v < 0:
            raise ValueError("residue of an element of negative valuation")
        if not self.terms and self.prec <= 0:
            raise PrecisionError("residue unknown at this precision")
        return FiniteFieldElem(self.field, self.coeff(0) if self.prec > 0 else 0)

    def truncate(self, prec: DeltaPoint) -> "SeriesElem":
        prec = as_delta(prec)
        if prec >= self.prec:
            return self
        return SeriesElem(self.ring, tuple(t for t in self.terms if t[0] < prec), prec)

    def with_prec(self, prec: DeltaPoint) -> "SeriesElem":
        """Same terms, precision lowered to min(prec, current)."""
        return self.truncate(prec)

    # arithmetic --------------------------------------------------------------------

    def _other(self, other) -> "SeriesElem":
        return self.ring.coerce(other)

    def __add__(self, other) -> "SeriesElem":
        o = self._other(other)
        if not o.terms and o.prec is INF:
            return self
        if not self.terms and self.prec is INF:
            return o
        prec = min(self.prec, o.prec)
        acc = dict(self.terms)
        add = self.field.add
        for e, c in o.terms:
            acc[e] = add(acc.get(e, 0), c)
        items = tuple(sorted((e, c) for e, c in acc.items() if c and e < prec))
        return SeriesElem(self.ring, items, prec)

    __radd__ = __add__

    def __neg__(self) -> "SeriesElem":
        neg = self.field.neg
        return SeriesElem(self.ring, tuple((e, neg(c)) for e, c in self.terms), self.prec)

    def __sub__(self, other) -> "SeriesElem":
        return self + (-self._other(other))

    def __rsub__(self, other) -> "SeriesElem":
        return self._other(other) + (-self)

    def __mul__(self, other) -> "SeriesElem":
        if isinstance(other, FiniteFieldElem):
            return self.scale(other.value)
        o = self._other(other)
        prec = min(self.prec + o.vlow(), o.prec + self.vlow())
        if not self.terms or not o.terms:
            return SeriesElem(self.ring, (), prec)
        acc: Dict[Fraction, int] = {}
        mul, add = self.field.mul, self.field.add
        for e1, c1 in self.terms:
            if e1 + o.terms[0][0] >= prec:
                break
            for e2, c2 in o.terms:
                e = e1 + e2
                if e >= prec:
                    break
                acc[e] = add(acc.get(e, 0), mul(c1, c2))
        items = tuple(sorted((e, c) for e, c in acc.items() if c))
        return SeriesElem(self.ring, items, prec)

    __rmul__ = __mul__

    def scale(self, c: int) -> "SeriesElem":
        """Multiply by a field constant."""
        if c == 0:
            return self.ring.zero()
        mul = self.field.mul
        return SeriesElem(self.ring, tuple((e, mul(x, c)) for e, x in self.terms), self.prec)

    def shift(self, e) -> "SeriesElem":
        """Multiply by T^e."""
        e = Fraction(e)
        return SeriesElem(self.ring, tuple((x + e, c) for x, c in self.terms), self.prec + e)

    def invert(self, prec: Optional[DeltaPoint] = None) -> "SeriesElem":
        """Multiplicative inverse.

        A finite-precision input of valuation g and precision N yields
        precision N - 2g.  An exact input is inverted to the requested
        absolute precision unless it is a monomial (then exactly).
        """
        if not self.terms:
            raise ZeroDivisionError("cannot invert indistinguishable-from-zero")
        g, c = self.terms[0]
        cinv = self.field.inv(c)
        if len(self.terms) == 1 and self.prec is INF:
            return SeriesElem(self.ring, ((-g, cinv),), INF)
        if self.prec is INF:
            if prec is None:
                raise PrecisionError("exact non-monomial inverse needs a target precision")
            target = as_delta(prec)
        else:
            target = self.prec - 2 * g
            if prec is not None:
                target = min(target, as_delta(prec))
        # x = c T^g (1 + y), v(y) > 0
        y = SeriesElem(
            self.ring,
            tuple((e - g, self.field.mul(x, cinv)) for e, x in self.terms[1:]),
            self.prec - g,
        )
        rel = target + g  # needed relative precision of sum (-y)^k
        s = self.ring.one().truncate(rel)
        if y.terms:
            neg_y = (-y).truncate(rel)
            power = self.ring.one()
            while True:
                power = (power * neg_y).truncate(rel)
                if not power.terms:
                    break
                s = s + power
        s = s.truncate(rel)
        return s.scale(cinv).shift(-g).truncate(target)

    def __truediv__(self, other) -> "SeriesElem":
        o = self._other(other)
        return self * o.invert()

    def __pow__(self, n: int) -> "SeriesElem":
        if n < 0:
            return self.invert() ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # Frobenius and lambda ------------------------------------------------------------

    def frob(self, n: int = 1) -> "SeriesElem":
        """sigma^n: (e, c) -> (p^n e, c^(p^n)).  Negative n needs p-divisible exponents in tame kind."""
        if n == 0 or (not self.terms and self.prec is INF):
            return self
        f = Fraction(self.ring.p) ** n
        fr = self.field.frob
        terms = tuple((e * f, fr(c, n)) for e, c in self.terms)
        if n < 0 and self.ring.lattice.kind == "tame":
            for e, _ in terms:
                if not self.ring.lattice.contains(e):
                    raise LatticeDefect(f"inverse Frobenius leaves the lattice at exponent {e * Fraction(self.ring.p) ** (-n)}", e)
        return SeriesElem(self.ring, terms, self.prec * f if self.prec is not INF else INF)

    def lam(self, i: int) -> "SeriesElem":
        """lambda_i: the unique y_i with x = sum_i sigma(y_i) T^i."""
        ring = self.ring
        if not 0 <= i < ring.n:
            raise IndexError(f"lambda index {i} out of range for basis size {ring.n}")
        p = ring.p
        fr = self.field.frob
        terms = tuple(
            ((e - i) / p, fr(c, -1)) for e, c in self.terms if ring.coset(e) == i
        )
        prec = INF if self.prec is INF else (self.prec - i) / p
        return SeriesElem(ring, terms, prec)

    def lam_path(self, path: Sequence[int]) -> "SeriesElem":
        """lambda_(d1) o ... o lambda_(dm) applied to x (innermost is the last index)."""
        x = self
        for i in reversed(tuple(path)):
            x = x.lam(i)
        return x

    def embed(self, emb, big_ring: SeriesRing) -> "SeriesElem":
        return self.ring.embed(self, emb, big_ring)


# -- text format ---------------------------------------------------------------------


def fmt_exp(e: Fraction) -> str:
    e = Fraction(e)
    if e.denominator == 1 and e >= 0:
        return str(e.numerator)
    return f"({e})"


def _fmt_coeff(field: FiniteField, c: int) -> str:
    s = field.format(c)
    return f"({s})" if "+" in s else s


def format_series(x: SeriesElem) -> str:
    field = x.field
    parts = []
    for e, c in x.terms:
        cs = _fmt_coeff(field, c)
        if e == 0:
            parts.append(cs)
            continue
        mono = "T" if e == 1 else f"T^{fmt_exp(e)}"
        parts.append(mono if c == 1 else f"{cs}*{mono}")
    if x.prec is not INF:
        parts.append("O(T)" if x.prec == 1 else f"O(T^{fmt_exp(x.prec)})")
    return " + ".join(parts) if parts else "0"


class ParseError(ValueError):
    def __init__(self, msg: str, text: str = "", pos: int = 0):
        super().__init__(f"{msg} at position {pos}" + (f" in {text!r}" if text else ""))
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\].,&=:]))"
)


def tokenize(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        val = m.group(kind)
        out.append((kind, val, m.start(kind)))
        pos = m.end()
    out.append(("end", "", n))
    return out


class TokenStream:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> Tuple[str, str, int]:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, val: str) -> bool:
        return self.peek()[1] == val and self.peek()[0] != "end"

    def expect(self, val: str) -> Tuple[str, str, int]:
        t = self.next()
        if t[1] != val or t[0] == "end":
            raise ParseError(f"expected {val!r}, found {t[1] or 'end of input'!r}", self.text, t[2])
        return t

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.text, self.peek()[2])

    def done(self) -> bool:
        return self.peek()[0] == "end"


def parse_rational(ts: TokenStream) -> Fraction:
    """Signed rational, optionally parenthesized: 3, -2, 1/3, (-1/2)."""
    if ts.at("("):
        ts.next()
        r = parse_rational(ts)
        ts.expect(")")
        return r
    sign = 1
    while ts.at("-") or ts.at("+"):
        if ts.next()[1] == "-":
            sign = -sign
    t = ts.next()
    if t[0] != "num":
        raise ParseError("expected a number", ts.text, t[2])
    num = int(t[1])
    den = 1
    if ts.at("/"):
        ts.next()
        t = ts.next()
        if t[0] != "num":
            raise ParseError("expected a denominator", ts.text, t[2])
        den = int(t[1])
        if den == 0:
            raise ParseError("zero denominator", ts.text, t[2])
    return sign * Fraction(num, den)


class _SeriesParser:
    """Recursive descent for series expressions over a ring.

    expr := ['-'] term (('+'|'-') term)*
    term := factor ('*' factor)*
    factor := atom ['^' exponent]
    atom := number | 'w' | 'T' | 'O' '(' ... ')' | '(' expr ')'
    """

    def __init__(self, ring: SeriesRing, ts: TokenStream, stop_names: Tuple[str, ...] = ()):
        self.ring = ring
        self.ts = ts
        self.stop_names = stop_names

    def expr(self) -> SeriesElem:
        ts = self.ts
        neg = False
        if ts.at("-"):
            ts.next()
            neg = True
        acc = self.term()
        if neg:
            acc = -acc
        while ts.at("+") or ts.at("-"):
            if ts.peek(1)[0] == "name" and ts.peek(1)[1] in self.stop_names:
                break
            op = ts.next()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> SeriesElem:
        acc = self.factor()
        while self.ts.at("*"):
            if self.ts.peek(1)[0] == "name" and self.ts.peek(1)[1] in self.stop_names:
                break
            self.ts.next()
            acc = acc * self.factor()
        return acc

    def factor(self) -> SeriesElem:
        ts = self.ts
        kind, val, pos = ts.peek()
        ring = self.ring
        if kind == "name" and val == "O":
            ts.next()
            ts.expect("(")
            t = ts.next()
            if t[1] != "T":
                raise ParseError("expected T inside O(...)", ts.text, t[2])
            e = Fraction(1)
            if ts.at("^"):
                ts.next()
                e = parse_rational(ts)
            ts.expect(")")
            return ring.zero(e)
        if kind == "num":
            ts.next()
            base = ring.from_int(int(val))
            return self._power(base, field_only=True)
        if kind == "name" and val == "w":
            ts.next()
            base = ring.scalar(ring.field.gen)
            return self._power(base, field_only=True)
        if kind == "name" and val == "T":
            ts.next()
            e = Fraction(1)
            if ts.at("^"):
                ts.next()
                e = parse_rational(ts)
            return ring.monomial(1, e)
        if kind == "op" and val == "(":
            ts.next()
            inner = self.expr()
            ts.expect(")")
            return self._power(inner, field_only=False)
        raise ParseError(f"unexpected token {val or 'end of input'!r}", ts.text, pos)

    def _power(self, base: SeriesElem, field_only: bool) -> SeriesElem:
        ts = self.ts
        if not ts.at("^"):
            return base
        ts.next()
        e = parse_rational(ts)
        if e.denominator != 1:
            raise ts.error("non-integer power of a non-monomial")
        if base.is_monomial() and base.is_exact():
            (g, c), = base.terms
            f = ring_pow_field(base.field, c, int(e))
            return base.ring.monomial(f, g * e)
        return base ** int(e)


def ring_pow_field(field: FiniteField, c: int, e: int) -> int:
    return field.pow(c, e)


def parse_series(ring: SeriesRing, text: str) -> SeriesElem:
    ts = TokenStream(text)
    x = _SeriesParser(ring, ts).expr()
    if not ts.done():
        raise ts.error(f"trailing input {ts.peek()[1]!r}")
    return x


def default_ring(p: int = 2, k: int = 1, lattice: str = "full") -> SeriesRing:
    return SeriesRing(get_field(p, k), ExponentLattice.parse(lattice))
