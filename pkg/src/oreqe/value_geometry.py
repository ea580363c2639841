"""Exact value-group arithmetic for the Frobenius valued setting.

Both the value group of the field and the value sort of the module are
realized as the rationals.  The endomorphisms sigma_v and tau are both
multiplication by the characteristic p.  The top element +oo of the value
sort is a separate singleton (:data:`INF`), never a large number.

The min-plus functions

    upsilon_inv(q, mu) = min_i  p^i * mu + gamma_i
    upsilon(q, delta)  = max_i  (delta - gamma_i) / p^i

are mutually inverse increasing bijections of Q for any profile with a
finite entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union


class _Infinity:
    """The top element +oo of the value sort."""

    _instance = None
    __slots__ = ()

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "oo"

    def __reduce__(self):
        return (_Infinity, ())

    def __hash__(self) -> int:
        return hash("value-sort-top")

    def __eq__(self, other) -> bool:
        return other is self

    def __ne__(self, other) -> bool:
        return other is not self

    def __lt__(self, other) -> bool:
        _check_comparable(other)
        return False

    def __le__(self, other) -> bool:
        _check_comparable(other)
        return other is self

    def __gt__(self, other) -> bool:
        _check_comparable(other)
        return other is not self

    def __ge__(self, other) -> bool:
        _check_comparable(other)
        return True

    def __add__(self, other):
        _check_comparable(other)
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("oo - oo is undefined")
        _check_comparable(other)
        return self

    def __rsub__(self, other):
        raise ArithmeticError("finite - oo is undefined")

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and other > 0:
            return self
        raise ArithmeticError(f"oo * {other!r} is undefined")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and other > 0:
            return self
        raise ArithmeticError(f"oo / {other!r} is undefined")

    def __neg__(self):
        raise ArithmeticError("-oo is not a value")


def _check_comparable(other) -> None:
    if not (other is INF or isinstance(other, (int, Fraction))):
        raise TypeError(f"cannot compare the value-sort top with {type(other).__name__}")


INF = _Infinity()

DeltaPoint = Union[Fraction, _Infinity]
GammaElem = Fraction


def is_inf(x) -> bool:
    return x is INF


def as_delta(x) -> DeltaPoint:
    """Coerce ints, Fractions, rational strings and 'oo'/'inf' into a DeltaPoint."""
    if x is INF:
        return INF
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if s.lower() in ("oo", "inf", "+oo", "+inf", "infinity"):
            return INF
        return Fraction(s)
    raise TypeError(f"not a value-sort point: {x!r}")


def fmt_delta(x: DeltaPoint) -> str:
    """Decimal-free rendering: 'a/b', an integer, or 'oo'."""
    if x is INF:
        return "oo"
    return str(Fraction(x))


def check_prime(p: int) -> int:
    if not isinstance(p, int) or p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise ValueError(f"characteristic must be a prime, got {p!r}")
    # 2-contracting: p*g >= g + g for g >= 0 holds because p >= 2
    return p


def sigma_v(gamma: GammaElem, p: int) -> GammaElem:
    return p * Fraction(gamma)


def tau(delta: DeltaPoint, n: int, p: int) -> DeltaPoint:
    """tau^n(delta) = p^n * delta; n may be negative."""
    if delta is INF:
        return INF
    return Fraction(delta) * Fraction(p) ** n


@dataclass(frozen=True)
class ValueProfile:
    """Valuations (gamma_0, ..., gamma_d) of the coefficients of an Ore polynomial.

    Zero coefficients carry INF and are ignored by the min/max formulas.
    """

    p: int
    entries: Tuple[Tuple[int, DeltaPoint], ...]

    @classmethod
    def from_gammas(cls, p: int, gammas: Iterable) -> "ValueProfile":
        return cls(p, tuple((i, as_delta(g)) for i, g in enumerate(gammas)))

    @property
    def degree(self) -> int:
        finite = [i for i, g in self.entries if g is not INF]
        return max(finite) if finite else -1

    def finite(self) -> Sequence[Tuple[int, Fraction]]:
        out = [(i, g) for i, g in self.entries if g is not INF]
        if not out:
            raise ValueError("zero polynomial has no value profile")
        return out

    def shift(self, n: int) -> "ValueProfile":
        """Profile of t^n * q."""
        return ValueProfile(self.p, tuple((i + n, g) for i, g in self.entries))

    def add_scalar(self, gamma: Fraction) -> "ValueProfile":
        """Profile of q * mu for a scalar mu of valuation gamma."""
        return ValueProfile(
            self.p, tuple((i, g if g is INF else g + gamma) for i, g in self.entries)
        )

    def frobenius(self, n: int = 1) -> "ValueProfile":
        """Profile of q^(sigma^n)."""
        f = Fraction(self.p) ** n
        return ValueProfile(self.p, tuple((i, g if g is INF else g * f) for i, g in self.entries))


def upsilon_inv(profile: ValueProfile, mu: DeltaPoint) -> DeltaPoint:
    """min over finite entries of p^i * mu + gamma_i."""
    entries = profile.finite()
    if mu is INF:
        return INF
    mu = Fraction(mu)
    p = profile.p
    return min(mu * p ** i + g for i, g in entries)


def upsilon_inv_witness(profile: ValueProfile, mu: Fraction) -> int:
    """Least index attaining the minimum in upsilon_inv(profile, mu)."""
    entries = profile.finite()
    mu = Fraction(mu)
    p = profile.p
    vals = [(mu * p ** i + g, i) for i, g in entries]
    best = min(v for v, _ in vals)
    return min(i for v, i in vals if v == best)


def upsilon(profile: ValueProfile, delta: DeltaPoint) -> Tuple[DeltaPoint, int]:
    """(mu, witness_index) with mu the largest solution of upsilon_inv(profile, mu) = delta."""
    entries = profile.finite()
    if delta is INF:
        raise ValueError("upsilon is only defined for finite delta")
    delta = Fraction(delta)
    p = profile.p
    mu = max((delta - g) / p ** i for i, g in entries)
    return mu, upsilon_inv_witness(profile, mu)


def upsilon_value(profile: ValueProfile, delta: DeltaPoint) -> DeltaPoint:
    """upsilon without the witness index; INF maps to INF."""
    if delta is INF:
        profile.finite()
        return INF
    return upsilon(profile, delta)[0]


def tau_minus_one_inv(gamma: GammaElem, p: int) -> Fraction:
    """The unique delta with p*delta = delta + gamma."""
    return Fraction(gamma) / (p - 1)


def minimizing_indices(profile: ValueProfile, mu: Fraction) -> Tuple[int, ...]:
    """All indices attaining the min in upsilon_inv(profile, mu)."""
    entries = profile.finite()
    p = profile.p
    vals = [(Fraction(mu) * p ** i + g, i) for i, g in entries]
    best = min(v for v, _ in vals)
    return tuple(i for v, i in vals if v == best)


def breakpoints(profile: ValueProfile) -> Tuple[Fraction, ...]:
    """Points mu where at least two entries attain the min (corners of the envelope)."""
    entries = profile.finite()
    p = profile.p
    cands = set()
    for a in range(len(entries)):
        for b in range(a + 1, len(entries)):
            (i, gi), (j, gj) = entries[a], entries[b]
            mu = (gi - gj) / (p ** j - p ** i)
            if len(minimizing_indices(profile, mu)) >= 2:
                cands.add(mu)
    return tuple(sorted(cands))
