"""Constructive solvers over the series model.

All solvers are greedy leading-term recursions.  To solve x.q = b, look at
the residual's leading term c_L T^delta, put mu = upsilon(q, delta), and pick
c with sum_{i in K} alpha_i c^(p^i) = c_L, where K are the indices attaining
the envelope minimum at mu and alpha_i the leading coefficients of q.  The
term c T^mu removes the residual's leading term.  Repeat until mu passes the
target precision.

Roots of separable q sit at the corners of the envelope: a corner mu with
minimizing indices K contributes an F_p-space of leading coefficients of
dimension max K - min K, and each is completed to a root by the
inhomogeneous solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .coeff_field import (
    DEFAULT_EXTENSION_CAP,
    ExtensionCapError,
    additive_kernel_ints,
    additive_solve_ints,
    embedding,
    extend_until_kernel_full,
    extend_until_solvable,
)
from .ore_poly import OrePoly, left_divide_linear, module_apply
from .series_field import LatticeDefect, PrecisionError, SeriesElem, SeriesRing
from .value_geometry import (
    INF,
    DeltaPoint,
    as_delta,
    breakpoints,
    minimizing_indices,
    upsilon,
)

DEFAULT_ITER_CAP = 400
# largest power of p allowed in an exponent denominator before the
# recursion is declared an accumulation (Artin-Schreier type) stall
DEFAULT_DENOM_CAP = 12


class SolveStall(ArithmeticError):
    """The greedy recursion accumulates below the target and cannot finish."""

    def __init__(self, msg: str, partial: Optional[SeriesElem] = None):
        super().__init__(msg)
        self.partial = partial


class NotSeparable(ValueError):
    pass


class FactorizationDefect(ArithmeticError):
    def __init__(self, msg: str, partial: Optional[list] = None):
        super().__init__(msg)
        self.partial = partial or []


@dataclass
class SolveResult:
    x: SeriesElem
    residual: SeriesElem
    ring: SeriesRing
    steps: int
    stalled: bool = False
    note: str = ""

    @property
    def prec(self) -> DeltaPoint:
        return self.x.prec


def _p_adic_order(n: int, p: int) -> int:
    k = 0
    while n and n % p == 0:
        n //= p
        k += 1
    return k


def _lead_data(q: OrePoly) -> List[Optional[int]]:
    return [c.terms[0][1] if c.terms else None for c in q.coeffs]


def _embed_all(ring: SeriesRing, new_field, items):
    emb = embedding(ring.field, new_field)
    big = ring.with_field(new_field)
    out = []
    for it in items:
        if isinstance(it, OrePoly):
            out.append(it.embed(emb, big))
        elif isinstance(it, SeriesElem):
            out.append(it.embed(emb, big))
        elif isinstance(it, dict):
            out.append({e: emb(c) for e, c in it.items()})
        else:
            out.append(it)
    return big, emb, out


def solve_inhomogeneous(
    q: OrePoly,
    b: SeriesElem,
    target: DeltaPoint,
    iter_cap: int = DEFAULT_ITER_CAP,
    ext_cap: int = DEFAULT_EXTENSION_CAP,
    denom_cap: int = DEFAULT_DENOM_CAP,
    partial_ok: bool = False,
) -> SolveResult:
    """Find x with x.q = b, correct below `target`.

    The result's precision is min(target, upsilon(q, P)) when the residual
    vanishes below its precision P, and infinite when it vanishes exactly.
    May extend the coefficient field; the result's ring says which field.
    When the recursion stalls, raise SolveStall, or with partial_ok return
    the partial sum with precision equal to the first missing exponent.
    """
    if q.is_zero():
        raise ValueError("cannot solve against the zero polynomial")
    target = as_delta(target)
    ring = q.ring
    if b.ring != ring:
        raise ValueError("right-hand side from a different ring")
    prof = q.profile()
    field = ring.field
    terms: Dict[Fraction, int] = {}
    rho = b
    steps = 0
    last_delta = None
    while rho.terms:
        delta, L = rho.terms[0]
        if last_delta is not None and delta <= last_delta:
            raise ArithmeticError("residual valuation failed to increase")
        last_delta = delta
        mu = upsilon(prof, delta)[0]
        if mu >= target:
            break
        steps += 1
        stall = ""
        if steps > iter_cap:
            stall = f"no convergence after {iter_cap} steps (last exponent {mu})"
        elif mu.denominator != 1 and _p_adic_order(mu.denominator, ring.p) > denom_cap:
            stall = f"exponents accumulate below {target} (denominator {mu.denominator})"
        if stall:
            partial = ring.make(terms.items(), mu)
            if not partial_ok:
                raise SolveStall(stall, partial)
            return SolveResult(partial, rho, ring, steps, True, stall)
        if not ring.lattice.contains(mu):
            raise LatticeDefect(f"solution needs exponent {mu} outside lattice {ring.lattice.spec()}", mu)
        K = minimizing_indices(prof, mu)
        lead = _lead_data(q)
        if len(K) == 1:
            k = K[0]
            c = field.frob(field.div(L, lead[k]), -k)
        else:
            coeffs = [0] * (max(K) + 1)
            for i in K:
                coeffs[i] = lead[i]
            c = additive_solve_ints(field, coeffs, L)
            if c is None:
                big_field, emb, c = extend_until_solvable(field, coeffs, L, ext_cap)
                ring, _, (q, rho, terms) = _embed_all(ring, big_field, [q, rho, terms])
                field = big_field
        mono = ring.monomial(c, mu)
        terms[mu] = c
        rho = rho - module_apply(mono, q)
    if not rho.terms and rho.prec is INF:
        prec = INF
    elif not rho.terms:
        prec = min(target, upsilon(prof, rho.prec)[0])
    else:
        prec = target
    x = ring.make(terms.items(), prec)
    return SolveResult(x, rho, ring, steps)


# -- roots ---------------------------------------------------------------------------


@dataclass
class RootSet:
    ring: SeriesRing
    basis: List[SeriesElem]
    roots: List[SeriesElem]
    residuals: List[DeltaPoint]
    dimension: int
    expected_dimension: int
    defect: bool = False
    notes: List[str] = dc_field(default_factory=list)
    valuations: List[Fraction] = dc_field(default_factory=list)

    def complete(self) -> bool:
        return not self.defect and self.dimension == self.expected_dimension


def _residual_bound(x: SeriesElem, q: OrePoly) -> DeltaPoint:
    r = module_apply(x, q)
    return r.vlow()


def roots_to_precision(
    q: OrePoly,
    N,
    ext_cap: int = DEFAULT_EXTENSION_CAP,
    iter_cap: int = DEFAULT_ITER_CAP,
    enumerate_all: bool = True,
) -> RootSet:
    """An F_p-basis and (optionally) all elements of the annihilator of q, to precision N."""
    if q.is_zero():
        raise ValueError("zero polynomial")
    if not q.is_separable():
        raise NotSeparable("root finding needs a nonzero constant coefficient")
    N = as_delta(N)
    ring = q.ring
    prof = q.profile()
    notes: List[str] = []
    defect = False
    found: List[Tuple[SeriesElem, Fraction]] = []  # (root in its ring, valuation)
    cur_q = q
    for mu in breakpoints(prof):
        K = minimizing_indices(prof, mu)
        dim_wanted = max(K) - min(K)
        if not ring.lattice.contains(mu):
            defect = True
            notes.append(f"roots of valuation {mu} lie outside lattice {ring.lattice.spec()}")
            continue
        lead = _lead_data(cur_q)
        coeffs = [0] * (max(K) + 1)
        for i in K:
            coeffs[i] = lead[i]
        kern = additive_kernel_ints(ring.field, coeffs)
        if len(kern) < dim_wanted:
            try:
                big_field, _ = extend_until_kernel_full(coeffs, dim_wanted, ext_cap, field=ring.field)
            except ExtensionCapError as exc:
                defect = True
                notes.append(f"corner {mu}: {exc}")
                continue
            ring, emb, (cur_q,) = _embed_all(ring, big_field, [cur_q])
            found = [(r.embed(embedding(r.field, big_field), ring), v) for r, v in found]
            lead = _lead_data(cur_q)
            coeffs = [0] * (max(K) + 1)
            for i in K:
                coeffs[i] = lead[i]
            kern = additive_kernel_ints(ring.field, coeffs)
        for c in kern:
            start = ring.monomial(c, mu)
            try:
                res = solve_inhomogeneous(
                    cur_q, -module_apply(start, cur_q), N, iter_cap=iter_cap, ext_cap=ext_cap, partial_ok=True
                )
            except (LatticeDefect, ExtensionCapError) as exc:
                defect = True
                notes.append(f"root with leading term {start}: {exc}")
                continue
            if res.ring != ring:
                ring = res.ring
                cur_q = cur_q.embed(embedding(cur_q.ring.field, ring.field), ring)
                found = [(r.embed(embedding(r.field, ring.field), ring), v) for r, v in found]
                start = start.embed(embedding(start.field, ring.field), ring)
            if res.stalled:
                notes.append(f"root with leading term {start} known below {res.x.prec} only: {res.note}")
            root = start + res.x
            found.append((root, mu))
    basis = [r if r.ring == ring else r.embed(embedding(r.field, ring.field), ring) for r, _ in found]
    roots: List[SeriesElem] = []
    if enumerate_all:
        roots = _span_series(ring, basis)
    residuals = [_residual_bound(r, cur_q) for r in basis]
    return RootSet(
        ring=ring,
        basis=basis,
        roots=roots,
        residuals=residuals,
        dimension=len(basis),
        expected_dimension=q.degree,
        defect=defect,
        notes=notes,
        valuations=[v for _, v in found],
    )


def _span_series(ring: SeriesRing, basis: Sequence[SeriesElem]) -> List[SeriesElem]:
    out = [ring.zero()]
    p = ring.p
    for b in basis:
        new = []
        for x in out:
            acc = x
            for _ in range(p):
                new.append(acc)
                acc = acc + b
        out = new
    return out


# -- factorization ---------------------------------------------------------------------


@dataclass(frozen=True)
class LinearFactor:
    kind: str  # "monic" (t - f), "unit" (t*f - 1), "const" (c)
    payload: SeriesElem

    def as_poly(self) -> OrePoly:
        ring = self.payload.ring
        f = self.payload
        if self.kind == "monic":
            return OrePoly(ring, [-f, ring.one()])
        if self.kind == "unit":
            return OrePoly(ring, [ring.from_int(-1), f])
        if self.kind == "const":
            return OrePoly(ring, [f])
        raise ValueError(f"unknown factor kind {self.kind!r}")

    def __str__(self) -> str:
        return str(self.as_poly())


def product(factors: Sequence[LinearFactor]) -> OrePoly:
    ring = factors[0].payload.ring
    acc = OrePoly.one(ring)
    for f in factors:
        acc = acc * f.as_poly()
    return acc


def _pick_root(basis: Sequence[SeriesElem], Nroot: DeltaPoint) -> SeriesElem:
    # full-precision roots first, then high valuation (those give monic factors)
    return max(basis, key=lambda r: (r.prec >= Nroot, r.vlow()))


def _factor_once(q: OrePoly, Nroot: DeltaPoint, ext_cap: int) -> Tuple[List[LinearFactor], SeriesRing, List[str]]:
    ring = q.ring
    cur = q
    factors: List[LinearFactor] = []
    notes: List[str] = []
    while cur.degree >= 1:
        if not cur.is_separable():
            # cur = t * cur'
            factors.append(LinearFactor("monic", ring.zero()))
            cur = OrePoly(ring, cur.coeffs[1:])
            continue
        rs = roots_to_precision(cur, Nroot, ext_cap=ext_cap, enumerate_all=False)
        notes.extend(rs.notes)
        if rs.ring != ring:
            emb = embedding(ring.field, rs.ring.field)
            ring = rs.ring
            cur = cur.embed(emb, ring)
            factors = [LinearFactor(f.kind, f.payload.embed(emb, ring)) for f in factors]
        if not rs.basis:
            raise FactorizationDefect("no usable root: " + "; ".join(rs.notes), factors)
        x = _pick_root(rs.basis, Nroot)
        f = x ** (ring.p - 1)
        h, r = left_divide_linear(cur, f)
        if r.terms:
            raise PrecisionError("root too imprecise for left division")
        if f.vlow() >= 0:
            factors.append(LinearFactor("monic", f))
            cur = h
        else:
            b = f.invert(Nroot)
            factors.append(LinearFactor("unit", b))
            cur = h.scale_left(f)
    factors.append(LinearFactor("const", cur.coeff(0)))
    return factors, ring, notes


@dataclass
class Factorization:
    factors: List[LinearFactor]
    ring: SeriesRing
    precision: DeltaPoint  # the product agrees with q below this
    prefixes_in_I: bool
    notes: List[str] = dc_field(default_factory=list)

    def reaches(self, N: DeltaPoint) -> bool:
        return self.prefixes_in_I and self.precision >= N


def _assess(q: OrePoly, factors: List[LinearFactor], ring: SeriesRing) -> Tuple[DeltaPoint, bool]:
    q_big = q if ring == q.ring else q.embed(embedding(q.ring.field, ring.field), ring)
    acc = OrePoly.one(ring)
    prefixes_ok = True
    for fac in factors:
        acc = acc * fac.as_poly()
        prefixes_ok = prefixes_ok and _in_I_known(acc)
    diff = acc - q_big
    prec = min((c.vlow() for c in diff.coeffs), default=INF)
    return prec, prefixes_ok


def factorize(q: OrePoly, N, ext_cap: int = DEFAULT_EXTENSION_CAP, max_tries: int = 4) -> Factorization:
    """Best-effort linear factorization (constant last) with its achieved precision."""
    if not q.in_I():
        raise ValueError("factorization needs a polynomial in I")
    N = as_delta(N)
    extra = Fraction(4)
    best: Optional[Factorization] = None
    last_err = ""
    for _ in range(max_tries):
        try:
            factors, ring, notes = _factor_once(q, N + extra, ext_cap)
        except PrecisionError as exc:
            last_err = str(exc)
            extra = extra * 2 + 4
            continue
        prec, ok = _assess(q, factors, ring)
        cand = Factorization(factors, ring, prec, ok, notes)
        if best is None or (cand.prefixes_in_I, cand.precision) > (best.prefixes_in_I, best.precision):
            best = cand
        if cand.reaches(N):
            return cand
        extra = extra * 2 + 4
    if best is None:
        raise FactorizationDefect(f"factorization failed: {last_err}")
    return best


def factor_linear(q: OrePoly, N, ext_cap: int = DEFAULT_EXTENSION_CAP, max_tries: int = 4) -> List[LinearFactor]:
    """Linear factors (constant last) whose product matches q below N, every prefix in I."""
    fz = factorize(q, N, ext_cap, max_tries)
    if not fz.reaches(as_delta(N)):
        raise FactorizationDefect(
            f"product matches only below {fz.precision}: " + "; ".join(fz.notes), fz.factors
        )
    return fz.factors


def _in_I_known(q: OrePoly) -> bool:
    """I-membership decided from the known terms (all valuations >= 0, one equal to 0)."""
    vals = [c.vlow() for c in q.coeffs]
    return min(vals) == 0 and all(v >= 0 for v in vals)


# -- witnesses -------------------------------------------------------------------------


def divide_witness(n: SeriesElem, q: OrePoly, N=None, **kw) -> SolveResult:
    """m with m.q = n (below N) and w(m) = upsilon(q, w(n))."""
    if not n.terms:
        raise PrecisionError("right-hand side is indistinguishable from zero")
    if not q.is_separable():
        raise NotSeparable("divisibility witness needs a separable polynomial")
    mu = upsilon(q.profile(), n.terms[0][0])[0]
    if N is None:
        N = mu + 8
    res = solve_inhomogeneous(q, n, as_delta(N), **kw)
    if res.x.vlow() != mu:
        raise ArithmeticError(f"witness valuation {res.x.vlow()} differs from {mu}")
    return res


def density_witness(m: SeriesElem, delta) -> SeriesElem:
    """n with w(m - sigma(n)) >= delta."""
    delta = as_delta(delta)
    if m.prec < delta:
        raise PrecisionError(f"element known only below {m.prec}, need {delta}")
    ring = m.ring
    prefix = [(e, c) for e, c in m.terms if e < delta]
    for e, _ in prefix:
        if not ring.p_divisible(e):
            raise LatticeDefect(f"exponent {e} is not a p-th power exponent in lattice {ring.lattice.spec()}", e)
    return ring.make(prefix).frob(-1)
