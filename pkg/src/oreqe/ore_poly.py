"""The skew polynomial ring K[t; sigma] with sigma the Frobenius.

A polynomial is stored as its right coefficients: q = sum_i t^i * a_i.  The
commutation rule a*t = t*sigma(a) gives the product

    (sum_i t^i a_i)(sum_j t^j b_j) = sum_{i,j} t^(i+j) sigma^j(a_i) b_j

and the module action x . q = sum_i sigma^i(x) a_i.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .series_field import (
    LatticeDefect,
    ParseError,
    SeriesElem,
    SeriesRing,
    TokenStream,
    format_series,
    parse_rational,
)
from .value_geometry import INF, DeltaPoint, ValueProfile


class DivisionError(ArithmeticError):
    pass


class OrePoly:
    """Immutable skew polynomial with right coefficients."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: SeriesRing, coeffs: Sequence):
        cs = [ring.coerce(c) for c in coeffs]
        while cs and not cs[-1].terms:
            cs.pop()
        self.ring = ring
        self.coeffs: Tuple[SeriesElem, ...] = tuple(cs)

    # constructors ------------------------------------------------------------------

    @classmethod
    def zero(cls, ring: SeriesRing) -> "OrePoly":
        return cls(ring, [])

    @classmethod
    def one(cls, ring: SeriesRing) -> "OrePoly":
        return cls(ring, [ring.one()])

    @classmethod
    def t_power(cls, ring: SeriesRing, n: int, coeff: Optional[SeriesElem] = None) -> "OrePoly":
        c = ring.one() if coeff is None else coeff
        return cls(ring, [ring.zero()] * n + [c])

    @classmethod
    def const(cls, ring: SeriesRing, c) -> "OrePoly":
        return cls(ring, [ring.coerce(c)])

    @classmethod
    def parse(cls, ring: SeriesRing, text: str) -> "OrePoly":
        return parse_ore(ring, text)

    # structure ---------------------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> SeriesElem:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.ring.zero()

    @property
    def lc(self) -> SeriesElem:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def is_scalar(self) -> bool:
        return len(self.coeffs) <= 1

    def is_separable(self) -> bool:
        """Nonzero constant coefficient."""
        return bool(self.coeffs) and bool(self.coeffs[0].terms)

    def t_adic_order(self) -> int:
        """Largest m with q = t^m q'."""
        for i, c in enumerate(self.coeffs):
            if c.terms:
                return i
        raise ValueError("zero polynomial")

    def split_t(self) -> Tuple[int, "OrePoly"]:
        """(m, q') with q = t^m q' and q' separable."""
        m = self.t_adic_order()
        return m, OrePoly(self.ring, self.coeffs[m:])

    def profile(self) -> ValueProfile:
        gammas = [c.terms[0][0] if c.terms else INF for c in self.coeffs]
        return ValueProfile.from_gammas(self.ring.p, gammas)

    def min_valuation(self) -> Fraction:
        vals = [c.terms[0][0] for c in self.coeffs if c.terms]
        if not vals:
            raise ValueError("zero polynomial")
        return min(vals)

    def in_I(self) -> bool:
        vals = [c.terms[0][0] for c in self.coeffs if c.terms]
        return bool(vals) and min(vals) == 0

    def is_integral(self) -> bool:
        return all(c.vlow() >= 0 for c in self.coeffs)

    def is_exact(self) -> bool:
        return all(c.prec is INF for c in self.coeffs)

    def min_prec(self) -> DeltaPoint:
        return min((c.prec for c in self.coeffs), default=INF)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrePoly):
            return NotImplemented
        return self.ring == other.ring and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"OrePoly({format_ore(self)})"

    def __str__(self) -> str:
        return format_ore(self)

    def agrees_with(self, other: "OrePoly", prec: DeltaPoint) -> bool:
        """Coefficients of self - other all have no term below prec."""
        diff = self - other
        return all(c.vlow() >= prec for c in diff.coeffs)

    # arithmetic --------------------------------------------------------------------

    def _coerce(self, other) -> "OrePoly":
        if isinstance(other, OrePoly):
            if other.ring != self.ring:
                raise ValueError("polynomials over different rings")
            return other
        return OrePoly(self.ring, [self.ring.coerce(other)])

    def __add__(self, other) -> "OrePoly":
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return OrePoly(self.ring, [self.coeff(i) + o.coeff(i) for i in range(n)])

    __radd__ = __add__

    def __neg__(self) -> "OrePoly":
        return OrePoly(self.ring, [-c for c in self.coeffs])

    def __sub__(self, other) -> "OrePoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "OrePoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "OrePoly":
        if isinstance(other, SeriesElem):
            return self.scale_right(other)
        o = self._coerce(other)
        if not self.coeffs or not o.coeffs:
            return OrePoly.zero(self.ring)
        out: List[Optional[SeriesElem]] = [None] * (len(self.coeffs) + len(o.coeffs) - 1)
        for j, b in enumerate(o.coeffs):
            if not b.terms and b.prec is INF:
                continue
            for i, a in enumerate(self.coeffs):
                term = a.frob(j) * b
                k = i + j
                out[k] = term if out[k] is None else out[k] + term
        return OrePoly(self.ring, [c if c is not None else self.ring.zero() for c in out])

    def __rmul__(self, other) -> "OrePoly":
        if isinstance(other, SeriesElem):
            return self.scale_left(other)
        return self._coerce(other) * self

    def scale_right(self, mu) -> "OrePoly":
        """q * mu = sum t^i a_i mu."""
        mu = self.ring.coerce(mu)
        return OrePoly(self.ring, [c * mu for c in self.coeffs])

    def scale_left(self, f) -> "OrePoly":
        """f * q = sum t^i sigma^i(f) a_i."""
        f = self.ring.coerce(f)
        return OrePoly(self.ring, [f.frob(i) * c for i, c in enumerate(self.coeffs)])

    def shift_t(self, n: int) -> "OrePoly":
        """t^n * q."""
        if n < 0:
            raise ValueError("negative t-shift")
        return OrePoly(self.ring, [self.ring.zero()] * n + list(self.coeffs))

    def __pow__(self, n: int) -> "OrePoly":
        result = OrePoly.one(self.ring)
        for _ in range(n):
            result = result * self
        return result

    def truncate(self, prec: DeltaPoint) -> "OrePoly":
        return OrePoly(self.ring, [c.truncate(prec) for c in self.coeffs])

    def map_coeffs(self, fn) -> "OrePoly":
        return OrePoly(self.ring, [fn(c) for c in self.coeffs])

    def embed(self, emb, big_ring: SeriesRing) -> "OrePoly":
        return OrePoly(big_ring, [c.embed(emb, big_ring) for c in self.coeffs])

    # module action --------------------------------------------------------------------

    def apply(self, x: SeriesElem) -> SeriesElem:
        """x . q = sum sigma^i(x) a_i."""
        return module_apply(x, self)

    # sigma calculus --------------------------------------------------------------------

    def pow_sigma(self, n: int = 1) -> "OrePoly":
        """q^(sigma^n): coefficient-wise Frobenius; t q^sigma = q t."""
        return OrePoly(self.ring, [c.frob(n) for c in self.coeffs])

    def sqrt_sigma(self, m: int = 1) -> "OrePoly":
        """Coefficient-wise sigma^(-m).

        In the tame kind a coefficient has an m-fold sigma-root only when it
        lies in K^(sigma^m); otherwise a LatticeDefect is raised.
        """
        if self.ring.n == 1:
            return self.pow_sigma(-m)
        out = []
        for c in self.coeffs:
            y = c
            for _ in range(m):
                for i in range(1, self.ring.n):
                    if y.lam(i).terms:
                        raise LatticeDefect("coefficient is not a sigma-power in the tame lattice")
                y = y.lam(0)
            out.append(y)
        return OrePoly(self.ring, out)

    def mu_conjugate(self, mu: SeriesElem, prec: Optional[DeltaPoint] = None) -> "OrePoly":
        """q^mu = sum t^i mu^(sigma^i) a_i mu^(-1)."""
        mu = self.ring.coerce(mu)
        inv = mu.invert(prec)
        return OrePoly(self.ring, [mu.frob(i) * c * inv for i, c in enumerate(self.coeffs)])

    def normalize_to_I(self) -> Tuple[SeriesElem, "OrePoly"]:
        """(mu, q*mu) with q*mu in I; mu inverts the leading monomial of the first minimal-valuation coefficient."""
        return normalize_to_I(self)

    def lambda_decompose(self, m: int) -> Dict[Tuple[int, ...], "OrePoly"]:
        return lambda_decompose_poly(self, m)


# -- free functions ----------------------------------------------------------------


def module_apply(x: SeriesElem, q: OrePoly) -> SeriesElem:
    out = x.ring.zero()
    xi = x
    for i, a in enumerate(q.coeffs):
        if i:
            xi = xi.frob(1)
        if a.terms or a.prec is not INF:
            out = out + xi * a
    return out


def normalize_to_I(q: OrePoly) -> Tuple[SeriesElem, OrePoly]:
    if q.is_zero():
        raise ValueError("cannot normalize the zero polynomial")
    g = q.min_valuation()
    k = min(i for i, c in enumerate(q.coeffs) if c.terms and c.terms[0][0] == g)
    e, c = q.coeffs[k].terms[0]
    mu = q.ring.monomial(q.ring.field.inv(c), -e)
    return mu, q.scale_right(mu)


def lambda_decompose_poly(q: OrePoly, m: int) -> Dict[Tuple[int, ...], OrePoly]:
    """Components comp_d with t^m q = sum_d comp_d * t^m * T^(sum p^(m-i) d_i)."""
    ring = q.ring
    if m == 0:
        return {(): q}
    if ring.n == 1:
        return {(0,) * m: q.pow_sigma(-m)}
    out: Dict[Tuple[int, ...], OrePoly] = {}
    for path in _paths(ring.n, m):
        out[path] = OrePoly(ring, [c.lam_path(path) for c in q.coeffs])
    return out


def basis_exponent(path: Sequence[int], p: int) -> int:
    m = len(path)
    return sum(d * p ** (m - 1 - i) for i, d in enumerate(path))


def recompose_lambda(components: Dict[Tuple[int, ...], OrePoly], m: int) -> OrePoly:
    """sum_d comp_d * t^m * c_d; equals t^m q for the decomposition of q."""
    items = list(components.items())
    ring = items[0][1].ring
    total = OrePoly.zero(ring)
    for path, comp in items:
        c = ring.monomial(1, basis_exponent(path, ring.p)) if ring.n > 1 else ring.one()
        total = total + comp * OrePoly.t_power(ring, m, c)
    return total


def _paths(n: int, m: int):
    if m == 0:
        yield ()
        return
    for head in range(n):
        for tail in _paths(n, m - 1):
            yield (head,) + tail


def right_divide(q1: OrePoly, q2: OrePoly, prec: Optional[DeltaPoint] = None) -> Tuple[OrePoly, OrePoly]:
    """(c, r) with q1 = q2*c + r and deg r < deg q2.

    Leading-coefficient inverses are exact when the leading coefficient of q2
    is a monomial; otherwise they are truncated at the requested precision.
    """
    if q2.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    ring = q1.ring
    d2 = q2.degree
    lc = q2.lc
    inv_cache: Dict[int, SeriesElem] = {}
    r = q1
    quot: Dict[int, SeriesElem] = {}
    guard = 0
    while not r.is_zero() and r.degree >= d2:
        guard += 1
        if guard > 10 * (q1.degree + 2):
            raise DivisionError("right division failed to reduce the degree")
        j = r.degree - d2
        if j not in inv_cache:
            inv_cache[j] = lc.frob(j).invert(prec)
        b = inv_cache[j] * r.lc
        quot[j] = quot.get(j, ring.zero()) + b
        r = r - q2 * OrePoly.t_power(ring, j, b)
        # force-drop the leading coefficient, which cancels up to precision
        if r.degree == j + d2:
            r = OrePoly(ring, r.coeffs[:-1])
    c = OrePoly(ring, [quot.get(i, ring.zero()) for i in range(max(quot) + 1)] if quot else [])
    return c, r


def generalized_right_divide(q1: OrePoly, q2: OrePoly) -> Tuple[SeriesElem, int, OrePoly, OrePoly]:
    """Exact pseudo-division: (a, d, c, r) with q1*a = q2*c + r, deg r < deg q2.

    Each reduction step either divides exactly (when sigma^j(lc q2) is a
    monomial not exceeding the valuation of the current leading coefficient)
    or scales the running remainder on the right by sigma^j(lc q2).  a is the
    product of the scalings and d counts them.  Integral inputs give integral
    outputs.
    """
    if q2.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if q1.degree < q2.degree:
        raise DivisionError("generalized division needs deg q1 >= deg q2")
    ring = q1.ring
    d2 = q2.degree
    lc = q2.lc
    a = ring.one()
    d = 0
    r = q1
    c = OrePoly.zero(ring)
    while not r.is_zero() and r.degree >= d2:
        j = r.degree - d2
        s = lc.frob(j)
        L = r.lc
        if s.is_monomial() and s.is_exact() and s.terms[0][0] <= L.vlow():
            b = s.invert() * L
        else:
            r = r.scale_right(s)
            c = c.scale_right(s)
            a = a * s
            d += 1
            b = L
        step = q2 * OrePoly.t_power(ring, j, b)
        c = c + OrePoly.t_power(ring, j, b)
        top = r.degree
        r = r - step
        if not r.is_zero() and r.degree == top:
            if r.lc.terms:
                raise DivisionError("leading coefficient failed to cancel")
            r = OrePoly(ring, r.coeffs[:-1])
    check = q1.scale_right(a) - (q2 * c + r)
    if not all(not x.terms for x in check.coeffs):
        raise DivisionError("generalized division identity failed")
    return a, d, c, r


def left_divide_linear(q: OrePoly, f: SeriesElem) -> Tuple[OrePoly, SeriesElem]:
    """(h, r) with q = (t - f)*h + r, r a scalar."""
    n = q.degree
    ring = q.ring
    if n < 1:
        return OrePoly.zero(ring), q.coeff(0)
    h: List[SeriesElem] = [ring.zero()] * n
    h[n - 1] = q.coeff(n)
    for i in range(n - 1, 0, -1):
        h[i - 1] = q.coeff(i) + f.frob(i) * h[i]
    r = q.coeff(0) + f * h[0]
    return OrePoly(ring, h), r


def ore_closure(r1: OrePoly, r2: OrePoly) -> Tuple[OrePoly, OrePoly]:
    """(q1, q2) with r1*q2 = r2*q1, both normalized into I by a common scalar."""
    if r1.is_zero() or r2.is_zero():
        raise ValueError("Ore closure of a zero polynomial")
    ring = r1.ring
    one, zero = OrePoly.one(ring), OrePoly.zero(ring)
    # a = r1*u + r2*v
    A, B = (r1, one, zero), (r2, zero, one)
    if A[0].degree < B[0].degree:
        A, B = B, A
    guard = 0
    while True:
        guard += 1
        if guard > 64:
            raise DivisionError("Ore closure did not terminate")
        a, _, c, rem = generalized_right_divide(A[0], B[0])
        # rem = A*a - B*c
        new = (rem, A[1].scale_right(a) - B[1] * c, A[2].scale_right(a) - B[2] * c)
        if rem.is_zero():
            u, v = new[1], new[2]
            break
        A, B = B, new
    q2, q1 = u, -v
    g = min(q1.min_valuation(), q2.min_valuation())
    mu = ring.monomial(1, -g)
    q1, q2 = q1.scale_right(mu), q2.scale_right(mu)
    if not (r1 * q2 - r2 * q1).is_zero():
        raise DivisionError("Ore closure identity failed")
    return q1, q2


# -- text format -----------------------------------------------------------------------


def format_ore(q: OrePoly) -> str:
    if q.is_zero():
        return "0"
    parts = []
    for i in range(q.degree, -1, -1):
        c = q.coeffs[i]
        if not c.terms and c.prec is INF:
            continue
        cs = format_series(c)
        if c.is_exact() and c.is_monomial() and c.terms[0][0] == 0:
            cs = c.field.format(c.terms[0][1])
        tp = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
        if i == 0:
            parts.append(f"({cs})")
        elif cs == "1":
            parts.append(tp)
        else:
            parts.append(f"{tp}*({cs})")
    return " + ".join(parts)


RESERVED = ("t", "T", "w", "O")


class OreParser:
    """Noncommutative expression parser over K[t; sigma].

    expr := ['-'] term (('+'|'-') term)*
    term := factor ('*' factor)*
    factor := atom ['^' exponent]
    atom := 't' | 'T' | 'w' | number | 'O(T^e)' | '(' expr ')'
    """

    def __init__(self, ring: SeriesRing, ts: TokenStream):
        self.ring = ring
        self.ts = ts

    def expr(self) -> OrePoly:
        ts = self.ts
        neg = False
        if ts.at("-"):
            ts.next()
            neg = True
        acc = self.term()
        if neg:
            acc = -acc
        while (ts.at("+") or ts.at("-")) and self._continues(1):
            op = ts.next()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def _continues(self, k: int) -> bool:
        kind, val, _ = self.ts.peek(k)
        return (kind == "name" and val in RESERVED) or kind == "num" or val == "("

    def term(self) -> OrePoly:
        acc = self.factor()
        while self.ts.at("*") and self._continues(1):
            self.ts.next()
            acc = acc * self.factor()
        return acc

    def factor(self) -> OrePoly:
        ts = self.ts
        ring = self.ring
        kind, val, pos = ts.peek()
        if kind == "name" and val == "t":
            ts.next()
            n = 1
            if ts.at("^"):
                ts.next()
                e = parse_rational(ts)
                if e.denominator != 1 or e < 0:
                    raise ParseError("t-exponent must be a nonnegative integer", ts.text, pos)
                n = int(e)
            return OrePoly.t_power(ring, n)
        if kind == "name" and val == "T":
            ts.next()
            e = Fraction(1)
            if ts.at("^"):
                ts.next()
                e = parse_rational(ts)
            return OrePoly.const(ring, ring.monomial(1, e))
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
            return _OPrec(ring, e)
        if kind == "num" or (kind == "name" and val == "w"):
            ts.next()
            c = ring.field.from_int(int(val)) if kind == "num" else ring.field.gen
            if ts.at("^"):
                ts.next()
                e = parse_rational(ts)
                if e.denominator != 1:
                    raise ParseError("field element power must be an integer", ts.text, pos)
                c = ring.field.pow(c, int(e))
            return OrePoly.const(ring, ring.scalar(c))
        if val == "(" and kind == "op":
            ts.next()
            inner = self.expr()
            ts.expect(")")
            if ts.at("^"):
                ts.next()
                e = parse_rational(ts)
                if e.denominator != 1 or e < 0:
                    raise ParseError("power must be a nonnegative integer", ts.text, pos)
                inner = inner ** int(e)
            return inner
        raise ParseError(f"unexpected token {val or 'end of input'!r}", ts.text, pos)


class _OPrec(OrePoly):
    """Constant O(T^e): a zero scalar that carries precision e."""

    __slots__ = ()

    def __init__(self, ring: SeriesRing, e):
        self.ring = ring
        self.coeffs = (ring.zero(e),)


def parse_ore(ring: SeriesRing, text: str) -> OrePoly:
    ts = TokenStream(text)
    q = OreParser(ring, ts).expr()
    if not ts.done():
        raise ts.error(f"trailing input {ts.peek()[1]!r}")
    return OrePoly(ring, q.coeffs)
