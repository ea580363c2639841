"""Acceptance criteria 1-9, one pass/fail line each.

Run under pytest (lines appear in the terminal summary) or directly with
`python3 tests/test_acceptance.py`.
"""

import itertools
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from oracles import (  # noqa: E402
    brute_kernel,
    random_profile,
    random_separable_in_I,
    random_series,
    splitting_degree,
    witness_values,
)
from oreqe.coeff_field import (  # noqa: E402
    DEFAULT_EXTENSION_CAP,
    ExtensionCapError,
    additive_kernel,
    additive_kernel_ints,
    extend_until_kernel_full,
    get_field,
    span_ints,
)
from oreqe.corpus import load_corpus  # noqa: E402
from oreqe.model_checker import check_axioms, compare  # noqa: E402
from oreqe.ore_poly import (  # noqa: E402
    OrePoly,
    generalized_right_divide,
    lambda_decompose_poly,
    recompose_lambda,
    right_divide,
)
from oreqe.qe_engine import InternalBreach, eliminate, replay  # noqa: E402
from oreqe.series_field import default_ring  # noqa: E402
from oreqe.solve import FactorizationDefect, factorize  # noqa: E402
from oreqe.torsion_values import ann_value_set, div_value_set  # noqa: E402
from oreqe.value_geometry import INF, upsilon, upsilon_inv  # noqa: E402

F4 = default_ring(2, 2)
TAME3 = default_ring(2, 1, "tame:3")
MODES = ("ttor", "torsion-free")


def _line(n, ok, detail, seconds):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} ({seconds:.1f}s) {detail}"


def _run(n, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, _line(n, ok, detail, time.perf_counter() - t0)


# -- 1. value geometry ---------------------------------------------------------------------


def criterion_1():
    rng = random.Random(1)
    bad = 0
    t0 = time.perf_counter()
    for i in range(10_000):
        p = (2, 3, 5)[i % 3]
        prof = random_profile(rng, p, max_degree=4)
        delta = Fraction(rng.randint(-60, 60), rng.choice([1, 2, 3, 4, 5, 6, 8, 9]))
        mu, _ = upsilon(prof, delta)
        m1 = Fraction(rng.randint(-60, 60), rng.choice([1, 2, 3, 5, 7]))
        if upsilon_inv(prof, mu) != delta:
            bad += 1
        elif (upsilon(prof, delta)[0] <= m1) != (delta <= upsilon_inv(prof, m1)):
            bad += 1
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 5, f"10000 pairs, {bad} failures, {dt:.2f}s (limit 5s)"


# -- 2. skew ring ------------------------------------------------------------------------------


def _poly(rng, ring, max_degree=3):
    d = rng.randint(0, max_degree)
    cs = [random_series(rng, ring, lo=-2, hi=19, max_terms=3) for _ in range(d + 1)]
    if cs[-1].is_zero():
        cs[-1] = ring.one()
    return OrePoly(ring, cs)


def criterion_2():
    rng = random.Random(2)
    t = OrePoly.t_power(F4, 1)
    bad, gen_checked = 0, 0
    t0 = time.perf_counter()
    for _ in range(1000):
        a, b, c = (_poly(rng, F4) for _ in range(3))
        if (a * b) * c != a * (b * c) or a * (b + c) != a * b + a * c or (a + b) * c != a * c + b * c:
            bad += 1
        x = random_series(rng, F4, lo=-2, hi=19)
        if OrePoly.const(F4, x) * t != t * OrePoly.const(F4, x.frob()):
            bad += 1
        # the plain algorithm re-expands exactly when the divisor's leading coefficient is a monomial
        lc = F4.monomial(rng.randrange(1, 4), Fraction(rng.randint(-4, 8), rng.choice([1, 2])))
        q2 = OrePoly(F4, list(b.coeffs[:-1]) + [lc])
        quo, rem = right_divide(a, q2)
        if q2 * quo + rem != a or not (rem.is_zero() or rem.degree < q2.degree):
            bad += 1
        if a.degree >= c.degree:
            alpha, _, quo, rem = generalized_right_divide(a, c)
            gen_checked += 1
            if a.scale_right(alpha) != c * quo + rem or not (rem.is_zero() or rem.degree < c.degree):
                bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 30 and gen_checked >= 300
    return ok, f"1000 triples, {gen_checked} generalized divisions, {bad} failures, {dt:.1f}s (limit 30s)"


# -- 3. lambda calculus ------------------------------------------------------------------------


def _reconstruct(x):
    total = x.ring.zero()
    for i in range(x.ring.n):
        total = total + x.lam(i).frob(1).shift(i)
    return total


def criterion_3():
    rng = random.Random(3)
    bad_x = sum(
        _reconstruct(x) != x
        for x in (random_series(rng, TAME3, lo=-4, hi=10, max_terms=6, denoms=(1, 3, 9)) for _ in range(1000))
    )
    bad_q = 0
    for i in range(200):
        m = i % 3
        d = rng.randint(0, 3)
        q = OrePoly(TAME3, [random_series(rng, TAME3, lo=-3, hi=8, max_terms=3, denoms=(1, 3)) for _ in range(d + 1)])
        if recompose_lambda(lambda_decompose_poly(q, m), m) != OrePoly.t_power(TAME3, m) * q:
            bad_q += 1
    return bad_x == 0 and bad_q == 0, f"1000 reconstructions ({bad_x} bad), 200 decompositions m<=2 ({bad_q} bad)"


# -- 4. factorization ----------------------------------------------------------------------


def _in_I(q):
    vals = [min((e for e, _ in c.terms), default=INF) for c in q.coeffs]
    return all(v >= 0 for v in vals) and any(v == 0 for v in vals)


def _check_factorization(q, N=12):
    """'ok', 'defect' or 'wrong' for one polynomial."""
    try:
        fz = factorize(q, N)
    except FactorizationDefect:
        return "defect"
    big = q
    if fz.ring != q.ring:
        from oreqe.coeff_field import embedding

        big = q.embed(embedding(q.ring.field, fz.ring.field), fz.ring)
    acc = OrePoly.one(fz.ring)
    prefixes = True
    for f in fz.factors:
        acc = acc * f.as_poly()
        prefixes = prefixes and _in_I(acc)
    matches = acc.agrees_with(big, N)
    if matches and prefixes:
        return "ok"
    # anything short of a full factorization must be flagged by the result itself
    return "defect" if not fz.reaches(N) else "wrong"


def _random_constant_in_I(rng, max_degree=3):
    while True:
        d = rng.randint(1, max_degree)
        cs = [rng.randrange(4) for _ in range(d + 1)]
        if cs[0] and cs[-1]:
            return OrePoly(F4, [F4.scalar(c) for c in cs])


def criterion_4():
    rng = random.Random(4)
    counts = {}
    for label, gen in (
        ("F4", lambda: _random_constant_in_I(rng)),
        ("F4((T))", lambda: random_separable_in_I(rng, F4, max_degree=3)),
    ):
        c = {"ok": 0, "defect": 0, "wrong": 0}
        for _ in range(100):
            c[_check_factorization(gen())] += 1
        counts[label] = c
    ok = all(c["wrong"] == 0 for c in counts.values())
    return ok, "; ".join(f"{k}: {v['ok']} exact, {v['defect']} reported defects, {v['wrong']} wrong" for k, v in counts.items())


# -- 5. kernel oracle ----------------------------------------------------------------------

FIELDS_256 = [(p, k) for p in range(2, 257) if all(p % r for r in range(2, p)) for k in range(1, 9) if p**k <= 256]


def _kernel_polys(F, d, rng, exhaustive_limit=4096, samples=15):
    if F.size ** (d + 1) <= exhaustive_limit:
        for cs in itertools.product(F.elements(), repeat=d + 1):
            if cs[0] and cs[d]:
                yield list(cs)
    else:
        for _ in range(samples):
            yield [rng.randrange(1, F.size)] + [rng.randrange(F.size) for _ in range(d - 1)] + [rng.randrange(1, F.size)]


def criterion_5(cap=DEFAULT_EXTENSION_CAP):
    """Kernel vs enumeration on every field of size <= 256, and the extension search.

    A full kernel over a larger field is confirmed by enumeration-free linear
    algebra on the returned extension. When the splitting field exceeds the
    cap, the cap error must be legitimate: the independently computed
    splitting degree has to land above the cap.
    """
    rng = random.Random(5)
    total = kern_bad = full = beyond = ext_bad = 0
    for p, k in FIELDS_256:
        F = get_field(p, k)
        for d in (1, 2):
            for cs in _kernel_polys(F, d, rng):
                total += 1
                basis = [x.value for x in additive_kernel([F.elem(c) for c in cs])]
                if sorted(span_ints(F, basis)) != brute_kernel(F, cs):
                    kern_bad += 1
                m = splitting_degree(F, cs)
                try:
                    big, emb = extend_until_kernel_full([F.elem(c) for c in cs], d, cap=cap)
                except ExtensionCapError as err:
                    beyond += 1
                    if p ** (k * m) <= cap or err.achieved >= d:
                        ext_bad += 1
                    continue
                kern = additive_kernel_ints(big, [emb(c) for c in cs])
                if big.k != k * m or len(kern) != d:
                    ext_bad += 1
                else:
                    full += 1
    ok = kern_bad == 0 and ext_bad == 0
    detail = (
        f"{len(FIELDS_256)} fields, {total} q: kernel mismatches {kern_bad}; "
        f"dimension d reached in {full}, splitting field beyond cap {cap} in {beyond} "
        f"(all confirmed by the splitting-degree oracle), wrong {ext_bad}"
    )
    return ok, detail


# -- 6. torsion value sets -----------------------------------------------------------------


def criterion_6():
    rng = random.Random(6)
    bad = 0
    for _ in range(50):
        q = random_separable_in_I(rng, F4, max_degree=2)
        delta = Fraction(rng.randint(-4, 12), rng.choice([1, 2]))
        A, D = ann_value_set(q, 16), div_value_set(q, delta, 16)
        ann, div, rs = witness_values(q, delta)
        d = q.degree
        if not rs.complete() or A.values() != ann or D.values() != div:
            bad += 1
        elif len(ann) > 2 ** max(d - 1, 0) or len(div) > 2**d:
            bad += 1
    return bad == 0, f"50 polynomials, {bad} mismatches against witness search or cardinality bounds"


# -- 7. corpus soundness -------------------------------------------------------------------


def criterion_7(samples=200, N=16):
    t0 = time.perf_counter()
    corpus = load_corpus()
    problems = []
    rules, notes = set(), set()
    worst_unknown, total_dis = 0.0, 0
    for e in corpus:
        phi = e.formula()
        if len(phi.bound) > 2 or max((c.degree for a in phi.atoms for c in a.term.monos.values()), default=0) > 4:
            problems.append(f"line {e.line}: outside corpus bounds")
        for mode in MODES:
            try:
                psi, tr = eliminate(phi, mode)
            except InternalBreach as err:
                problems.append(f"line {e.line} {mode}: {err}")
                continue
            rules |= set(tr.rules())
            notes |= {(s.rule, s.note) for s in tr.steps if s.rule in ("cas1", "cas_constante")}
            if any(s.sepdeg[1] > s.sepdeg[0] for s in tr.steps) or (tr.steps and tr.steps[-1].sepdeg[1] != 0):
                problems.append(f"line {e.line} {mode}: separability degree")
            if any(a.kind not in ("eq", "cong") for a in psi.atoms):
                problems.append(f"line {e.line} {mode}: output atom")
            if mode == "ttor":
                rep = compare(phi, psi, samples=samples, N=N)
                total_dis += len(rep.disagreements)
                worst_unknown = max(worst_unknown, rep.unknown_rate)
                if rep.disagreements or rep.unknown_rate >= 0.2:
                    problems.append(f"line {e.line}: {len(rep.disagreements)} disagreements, unknown {rep.unknown_rate:.2f}")
    dt = time.perf_counter() - t0
    branches = sorted(f"{r} {n}" for r, n in notes)
    ok = not problems and len(corpus) >= 40 and dt < 600
    detail = (
        f"{len(corpus)} formulas, {total_dis} disagreements, worst unknown rate {worst_unknown:.2f}, "
        f"{len(rules)} rules, branches [{', '.join(branches)}], {dt:.0f}s (limit 600s)"
    )
    if problems:
        detail += "; " + "; ".join(problems[:5])
    return ok, detail


# -- 8. axioms -----------------------------------------------------------------------------


def criterion_8():
    out = []
    ok = True
    for ring in (F4, TAME3):
        rep = check_axioms(ring, samples=500)
        ok = ok and rep.ok()
        failed = sum(r.failed for r in rep.results)
        partial = sum(r.partial for r in rep.results)
        out.append(f"{ring.field.spec()} {ring.lattice.spec()}: {len(rep.results)} schemes, {failed} failures, {partial} partial")
    return ok, "; ".join(out)


# -- 9. trace determinism ------------------------------------------------------------------


def criterion_9():
    n = bad = 0
    for e in load_corpus():
        for mode in MODES:
            _, tr = eliminate(e.formula(), mode)
            text = tr.dumps()
            same, again = replay(text)
            n += 1
            if not same or again != text or json.loads(text)["config"].get("mode") != mode:
                bad += 1
    return bad == 0, f"{n} traces replayed, {bad} differ"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


def _check(n, request):
    ok, line = _run(n, CRITERIA[n - 1])
    request.config._acceptance_lines = getattr(request.config, "_acceptance_lines", []) + [line]
    print(line)
    assert ok, line


def test_value_geometry(request):
    _check(1, request)


def test_skew_ring(request):
    _check(2, request)


def test_lambda_calculus(request):
    _check(3, request)


def test_factorization(request):
    _check(4, request)


def test_kernel_oracle(request):
    _check(5, request)


def test_torsion_value_sets(request):
    _check(6, request)


def test_corpus_soundness(request):
    _check(7, request)


def test_axiom_suite(request):
    _check(8, request)


def test_trace_determinism(request):
    _check(9, request)


if __name__ == "__main__":
    results = [_run(i + 1, fn) for i, fn in enumerate(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
