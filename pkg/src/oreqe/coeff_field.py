"""Finite fields F_{p^k} with Frobenius and F_p-linear analysis of additive polynomials.

An element is encoded as the integer sum(c_j * p^j) of its coordinates in the
power basis 1, x, ..., x^(k-1) of F_p[x]/(f).  The modulus f is the least monic
irreducible of degree k when coefficient lists are compared from the top
degree down, so field descriptors and traces are reproducible.

Fields of size at most 2^16 use exp/log tables; larger fields fall back to
schoolbook polynomial arithmetic.
"""

from __future__ import annotations

import functools
import re
import threading
from typing import Dict, List, Optional, Sequence, Tuple

TABLE_LIMIT = 1 << 16
DEFAULT_EXTENSION_CAP = 1 << 16


class ExtensionCapError(ArithmeticError):
    """Raised when a kernel needs a field larger than the configured cap."""

    def __init__(self, achieved: int, wanted: int, cap: int):
        super().__init__(f"extension cap {cap} reached with kernel dimension {achieved} < {wanted}")
        self.achieved = achieved
        self.wanted = wanted


# -- polynomials over F_p as coefficient lists (low degree first) ---------------


def _ptrim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: Sequence[int], m: Sequence[int], p: int) -> List[int]:
    a = list(a)
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(_ptrim(a)) - 1 >= dm:
        shift = len(a) - 1 - dm
        f = a[-1] * inv_lead % p
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - f * c) % p
    return a


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _is_irreducible(f: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg(f)/2."""
    k = len(f) - 1
    if k <= 0:
        return False
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for code in range(p ** d):
            g = [(code // p ** i) % p for i in range(d)] + [1]
            if not _ptrim(_pmod(f, g, p)):
                return False
    return True


@functools.lru_cache(maxsize=None)
def least_irreducible(p: int, k: int) -> Tuple[int, ...]:
    """Least monic irreducible of degree k, comparing coefficients from x^(k-1) down."""
    for code in range(p ** k):
        # top coefficient varies slowest
        lower = [(code // p ** (k - 1 - i)) % p for i in range(k)]
        f = list(reversed(lower)) + [1]
        if _is_irreducible(f, p):
            return tuple(f)
    raise ValueError(f"no irreducible polynomial of degree {k} over F_{p}")


def _factorize(n: int) -> List[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- the field --------------------------------------------------------------------


class FiniteField:
    """The field F_{p^k} = F_p[x]/(modulus); elements are ints in [0, p^k)."""

    def __init__(self, p: int, k: int, modulus: Optional[Sequence[int]] = None):
        from .value_geometry import check_prime

        check_prime(p)
        if k < 1:
            raise ValueError("extension degree must be positive")
        if modulus is None:
            modulus = least_irreducible(p, k)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of the stated degree")
        if not _is_irreducible(list(modulus), p):
            raise ValueError(f"modulus {modulus} is reducible over F_{p}")
        self.p = p
        self.k = k
        self.modulus = modulus
        self.size = p ** k
        self._pows = [p ** j for j in range(k)]
        self._exp: Optional[List[int]] = None
        self._log: Optional[List[int]] = None
        if self.size <= TABLE_LIMIT:
            self._build_tables()

    # identity: fields are interned through get_field, so `is` works, but make
    # equality structural as well
    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteField) and (self.p, self.k, self.modulus) == (
            other.p,
            other.k,
            other.modulus,
        )

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.modulus))

    def __repr__(self) -> str:
        return f"FiniteField({self.spec()})"

    def spec(self) -> str:
        """Field spec string 'p^k:c0,c1,...,ck' (modulus coefficients, low degree first)."""
        return f"{self.p}^{self.k}:" + ",".join(str(c) for c in self.modulus)

    # coordinates ------------------------------------------------------------------

    def coords(self, a: int) -> Tuple[int, ...]:
        p = self.p
        return tuple((a // q) % p for q in self._pows)

    def from_coords(self, cs: Sequence[int]) -> int:
        cs = list(cs)
        if len(cs) > self.k:
            # reduce a polynomial in x of higher degree
            cs = _pmod(cs, self.modulus, self.p)
        return sum((int(c) % self.p) * q for c, q in zip(cs, self._pows))

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F_p -> F_{p^k}."""
        return n % self.p

    @property
    def gen(self) -> int:
        """The class of x (printed as 'w')."""
        if self.k == 1:
            return (-self.modulus[0]) % self.p
        return self.p

    # arithmetic -------------------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if a == 0:
            return b
        if b == 0:
            return a
        p = self.p
        out, q = 0, 1
        while a or b:
            out += ((a % p + b % p) % p) * q
            a //= p
            b //= p
            q *= p
        return out

    def neg(self, a: int) -> int:
        if self.p == 2 or a == 0:
            return a
        p = self.p
        out, q = 0, 1
        while a:
            out += ((-(a % p)) % p) * q
            a //= p
            q *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def _mul_poly(self, a: int, b: int) -> int:
        prod = _pmul(self.coords(a), self.coords(b), self.p)
        return self.from_coords(_pmod(prod, self.modulus, self.p))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._log is not None:
            return self._exp[(self._log[a] + self._log[b]) % (self.size - 1)]
        return self._mul_poly(a, b)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a = self.inv(a)
            e = -e
        if a == 0:
            return 0 if e > 0 else 1
        if self._log is not None:
            return self._exp[(self._log[a] * e) % (self.size - 1)]
        result, base = 1, a
        while e:
            if e & 1:
                result = self._mul_poly(result, base)
            base = self._mul_poly(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        if self._log is not None:
            return self._exp[(-self._log[a]) % (self.size - 1)]
        return self.pow(a, self.size - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def frob(self, a: int, n: int = 1) -> int:
        """a^(p^n); n may be negative."""
        n %= self.k
        if n == 0 or a == 0:
            return a
        return self.pow(a, self.p ** n)

    def elements(self) -> range:
        return range(self.size)

    # tables -----------------------------------------------------------------------

    def _build_tables(self) -> None:
        q = self.size
        if q == 2:
            self._exp, self._log = [1], [0, 0]
            return
        order = q - 1
        primes = _factorize(order)
        g = None
        for cand in range(2, q) if q > 2 else []:
            ok = True
            for r in primes:
                if self._pow_slow(cand, order // r) == 1:
                    ok = False
                    break
            if ok:
                g = cand
                break
        if g is None:
            g = 1
        exp = [0] * order
        log = [0] * q
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = self._mul_poly(x, g)
        self._exp, self._log = exp, log

    def _pow_slow(self, a: int, e: int) -> int:
        result, base = 1, a
        while e:
            if e & 1:
                result = self._mul_poly(result, base)
            base = self._mul_poly(base, base)
            e >>= 1
        return result

    # text -------------------------------------------------------------------------

    def format(self, a: int) -> str:
        if self.k == 1:
            return str(a)
        cs = self.coords(a)
        parts = []
        for j in range(self.k - 1, -1, -1):
            c = cs[j]
            if c == 0:
                continue
            if j == 0:
                parts.append(str(c))
            else:
                mono = "w" if j == 1 else f"w^{j}"
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(parts) if parts else "0"

    def parse(self, text: str) -> int:
        """Parse a polynomial in w with integer coefficients, e.g. '2*w^2+w+1'."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty field literal")
        if not re.fullmatch(r"[0-9w^*+\-()]+", s):
            raise ValueError(f"bad field literal {text!r}")
        total = 0
        for sign, body in re.findall(r"([+-]?)([^+-]+)", s):
            val = 1
            for factor in body.split("*"):
                factor = factor.strip("()")
                if factor.startswith("w"):
                    e = int(factor[2:]) if factor.startswith("w^") else 1
                    if factor not in ("w",) and not factor.startswith("w^"):
                        raise ValueError(f"bad field literal {text!r}")
                    val = self.mul(val, self.pow(self.gen, e))
                else:
                    val = self.mul(val, self.from_int(int(factor)))
            total = self.sub(total, val) if sign == "-" else self.add(total, val)
        return total

    def elem(self, value) -> "FiniteFieldElem":
        if isinstance(value, str):
            value = self.parse(value)
        return FiniteFieldElem(self, int(value))


@functools.lru_cache(maxsize=None)
def _get_field(p: int, k: int, modulus: Optional[Tuple[int, ...]]) -> FiniteField:
    return FiniteField(p, k, modulus)


def get_field(p: int, k: int = 1, modulus: Optional[Sequence[int]] = None) -> FiniteField:
    """Interned field constructor (default modulus: least irreducible)."""
    if modulus is None:
        modulus = least_irreducible(p, k)
    return _get_field(p, k, tuple(modulus))


def parse_field_spec(spec: str) -> FiniteField:
    """Parse 'p^k' or 'p^k:c0,...,ck' or 'p'."""
    s = spec.strip()
    head, _, mod = s.partition(":")
    if "^" in head:
        p_s, k_s = head.split("^", 1)
        p, k = int(p_s), int(k_s)
    else:
        p, k = int(head), 1
    if mod:
        coeffs = [int(c) for c in mod.split(",")]
        return get_field(p, k, coeffs)
    return get_field(p, k)


class FiniteFieldElem:
    """An element of a FiniteField with operator overloading."""

    __slots__ = ("field", "value")

    def __init__(self, field: FiniteField, value: int):
        self.field = field
        self.value = value

    def _coerce(self, other) -> int:
        if isinstance(other, FiniteFieldElem):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other.value
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return FiniteFieldElem(self.field, self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FiniteFieldElem(self.field, self.field.sub(self.value, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        return FiniteFieldElem(self.field, self.field.sub(o, self.value))

    def __mul__(self, other):
        o = self._coerce(other)
        return FiniteFieldElem(self.field, self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return FiniteFieldElem(self.field, self.field.div(self.value, o))

    def __neg__(self):
        return FiniteFieldElem(self.field, self.field.neg(self.value))

    def __pow__(self, e: int):
        return FiniteFieldElem(self.field, self.field.pow(self.value, e))

    def __eq__(self, other) -> bool:
        if isinstance(other, FiniteFieldElem):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == self.field.from_int(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.p, self.field.k, self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"<{self.field.format(self.value)} in F_{self.field.size}>"

    def __str__(self) -> str:
        return self.field.format(self.value)

    @property
    def coords(self) -> Tuple[int, ...]:
        return self.field.coords(self.value)


def frobenius(x: FiniteFieldElem, n: int = 1) -> FiniteFieldElem:
    """x^(p^n); n may be negative since Frobenius is an automorphism."""
    return FiniteFieldElem(x.field, x.field.frob(x.value, n))


# -- linear algebra over F_p ------------------------------------------------------


def _rref(rows: List[List[int]], p: int, ncols: int) -> Tuple[List[List[int]], List[int]]:
    rows = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] % p), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        rows[r] = [(v * inv) % p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] % p:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def nullspace_mod_p(matrix: List[List[int]], p: int, ncols: int) -> List[List[int]]:
    """Basis of {v : M v = 0} over F_p."""
    rows, pivots = _rref(matrix, p, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(rows, pivots):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return basis


def solve_mod_p(matrix: List[List[int]], rhs: List[int], p: int, ncols: int) -> Optional[List[int]]:
    """One solution of M v = rhs over F_p, or None."""
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    rows, pivots = _rref(aug, p, ncols + 1)
    if ncols in pivots:
        return None
    v = [0] * ncols
    for row, pc in zip(rows, pivots):
        v[pc] = row[ncols]
    return v


# -- additive polynomials ------------------------------------------------------------


def additive_eval(field: FiniteField, coeffs: Sequence[int], x: int) -> int:
    """sum_i a_i * x^(p^i)."""
    total = 0
    xi = x
    for i, a in enumerate(coeffs):
        if i:
            xi = field.frob(xi, 1)
        if a:
            total = field.add(total, field.mul(a, xi))
    return total


def additive_operator(field: FiniteField, coeffs: Sequence[int]) -> List[List[int]]:
    """k x k matrix over F_p of x -> sum a_i x^(p^i) in the power basis (column j = image of x^j)."""
    k = field.k
    cols = [field.coords(additive_eval(field, coeffs, field.p ** j if k > 1 else 1)) for j in range(k)]
    return [[cols[j][r] for j in range(k)] for r in range(k)]


def _as_ints(field: FiniteField, coeffs) -> List[int]:
    out = []
    for c in coeffs:
        if isinstance(c, FiniteFieldElem):
            if c.field != field:
                raise ValueError("coefficient from a different field")
            out.append(c.value)
        else:
            out.append(int(c))
    return out


def additive_kernel(coeffs: Sequence[FiniteFieldElem], field: Optional[FiniteField] = None) -> List[FiniteFieldElem]:
    """F_p-basis of the roots in the field of sum a_i X^(p^i)."""
    if field is None:
        if not coeffs or not isinstance(coeffs[0], FiniteFieldElem):
            raise ValueError("field required for raw coefficients")
        field = coeffs[0].field
    ints = _as_ints(field, coeffs)
    if not any(ints):
        raise ValueError("additive polynomial with all-zero coefficients")
    basis = additive_kernel_ints(field, ints)
    return [FiniteFieldElem(field, b) for b in basis]


def additive_kernel_ints(field: FiniteField, coeffs: Sequence[int]) -> List[int]:
    mat = additive_operator(field, coeffs)
    vecs = nullspace_mod_p(mat, field.p, field.k)
    basis = [field.from_coords(v) for v in vecs]
    deg = max(i for i, a in enumerate(coeffs) if a)
    low = min(i for i, a in enumerate(coeffs) if a)
    assert len(basis) <= deg - low, "kernel dimension exceeds the additive degree"
    return basis


def additive_solve_ints(field: FiniteField, coeffs: Sequence[int], rhs: int) -> Optional[int]:
    """One x in the field with sum a_i x^(p^i) = rhs, or None."""
    mat = additive_operator(field, coeffs)
    sol = solve_mod_p(mat, list(field.coords(rhs)), field.p, field.k)
    return None if sol is None else field.from_coords(sol)


def span_ints(field: FiniteField, basis: Sequence[int]) -> List[int]:
    """All F_p-linear combinations of the basis."""
    out = [0]
    for b in basis:
        new = []
        for x in out:
            acc = x
            for _ in range(field.p):
                new.append(acc)
                acc = field.add(acc, b)
        out = new
    return out


# -- embeddings -----------------------------------------------------------------------


class Embedding:
    """Field embedding F_{p^k} -> F_{p^k'} sending x to a root of the small modulus."""

    def __init__(self, small: FiniteField, big: FiniteField, image_of_gen: int):
        self.small = small
        self.big = big
        self.image_of_gen = image_of_gen
        powers = [1]
        for _ in range(1, small.k):
            powers.append(big.mul(powers[-1], image_of_gen))
        self._powers = powers
        self._cache: Dict[int, int] = {}

    def __call__(self, a: int) -> int:
        hit = self._cache.get(a)
        if hit is not None:
            return hit
        big = self.big
        out = 0
        for c, w in zip(self.small.coords(a), self._powers):
            if c:
                out = big.add(out, big.mul(big.from_int(c), w))
        if len(self._cache) < 1 << 16:
            self._cache[a] = out
        return out


_EMBED_CACHE: Dict[Tuple[FiniteField, FiniteField], Embedding] = {}
_EMBED_LOCK = threading.Lock()


def embedding(small: FiniteField, big: FiniteField) -> Embedding:
    """Cached embedding; requires small.k | big.k and equal characteristic."""
    key = (small, big)
    emb = _EMBED_CACHE.get(key)
    if emb is not None:
        return emb
    if small.p != big.p or big.k % small.k:
        raise ValueError(f"no embedding {small.spec()} -> {big.spec()}")
    if small == big:
        emb = Embedding(small, big, small.gen)
    else:
        root = _find_root(small.modulus, big)
        emb = Embedding(small, big, root)
    with _EMBED_LOCK:
        return _EMBED_CACHE.setdefault(key, emb)


def _find_root(modulus: Sequence[int], big: FiniteField) -> int:
    """Least root (as an int) of the F_p-polynomial modulus in the big field."""

    def ev(x: int) -> int:
        acc = 0
        for c in reversed(modulus):
            acc = big.add(big.mul(acc, x), big.from_int(c))
        return acc

    k_small = len(modulus) - 1
    if big._log is not None:
        # roots lie in the subfield of order p^k_small
        step = (big.size - 1) // (big.p ** k_small - 1)
        cands = sorted(big._exp[(i * step) % (big.size - 1)] for i in range(big.p ** k_small - 1))
        for x in cands:
            if ev(x) == 0:
                return x
    for x in range(big.size):
        if ev(x) == 0:
            return x
    raise ArithmeticError("modulus has no root in the target field")


def extension(field: FiniteField, m: int) -> Tuple[FiniteField, Embedding]:
    big = get_field(field.p, field.k * m)
    return big, embedding(field, big)


def extend_until_kernel_full(
    coeffs: Sequence[FiniteFieldElem],
    d: int,
    cap: int = DEFAULT_EXTENSION_CAP,
    field: Optional[FiniteField] = None,
) -> Tuple[FiniteField, Embedding]:
    """Smallest F_{p^(k m)} over which sum a_i X^(p^i) has an F_p-kernel of dimension d."""
    if field is None:
        field = coeffs[0].field
    ints = _as_ints(field, coeffs)
    achieved = 0
    m = 1
    while field.p ** (field.k * m) <= cap:
        big, emb = extension(field, m)
        dim = len(additive_kernel_ints(big, [emb(a) for a in ints]))
        achieved = max(achieved, dim)
        if dim == d:
            return big, emb
        m += 1
    raise ExtensionCapError(achieved, d, cap)


def extend_until_solvable(
    field: FiniteField,
    coeffs: Sequence[int],
    rhs: int,
    cap: int = DEFAULT_EXTENSION_CAP,
) -> Tuple[FiniteField, Embedding, int]:
    """Smallest extension where sum a_i X^(p^i) = rhs has a solution."""
    m = 1
    while field.p ** (field.k * m) <= cap:
        big, emb = extension(field, m)
        sol = additive_solve_ints(big, [emb(a) for a in coeffs], emb(rhs))
        if sol is not None:
            return big, emb, sol
        m += 1
    raise ExtensionCapError(0, 1, cap)
