"""The ore-qe command line.

Exit codes: 0 success, 1 user error (bad flags, malformed input), 2 internal
invariant breach (the partial trace is dumped to stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .coeff_field import ExtensionCapError, embedding, parse_field_spec
from .formula import parse_formula, parse_qf
from .model_checker import DEFAULT_PRECISION, check_axioms, compare
from .ore_poly import OrePoly, module_apply
from .qe_engine import MODES, InternalBreach, ReplayMismatch, eliminate, replay
from .series_field import ExponentLattice, LatticeDefect, ParseError, PrecisionError, SeriesRing
from .solve import FactorizationDefect, NotSeparable, SolveStall, divide_witness, factorize, roots_to_precision
from .torsion_values import ann_value_set, div_value_set
from .value_geometry import INF, ValueProfile, check_prime, fmt_delta, upsilon, upsilon_inv

CONFIG_ENV = "ORE_QE_CONFIG"
OUTPUT_SCHEMA = "oreqe.output/1"


class UserError(Exception):
    pass


# -- configuration -----------------------------------------------------------------------------


def _defaults() -> dict:
    base = {"field": "2^2", "lattice": "full", "precision": str(DEFAULT_PRECISION), "seed": 0}
    path = os.environ.get(CONFIG_ENV)
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UserError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise UserError(f"config {path} must hold a JSON object")
        base.update({k: data[k] for k in base if k in data})
    return base


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UserError(f"not a rational number: {text!r}") from exc


def _ring(args) -> SeriesRing:
    try:
        field = parse_field_spec(args.field)
        lattice = ExponentLattice.parse(args.lattice)
        return SeriesRing(field, lattice)
    except ValueError as exc:
        raise UserError(str(exc)) from exc


def _precision(args) -> Fraction:
    n = _rational(str(args.precision))
    if n <= 0:
        raise UserError("precision must be positive")
    return n


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UserError(f"cannot read {path}: {exc.strerror}") from exc


def _parse(what: str, path: str, fn):
    text = _read(path).strip()
    try:
        return fn(text)
    except ParseError as exc:
        raise UserError(f"{path}: malformed {what}: {exc}") from exc


def _emit(obj: dict, out) -> None:
    obj = {"schema": OUTPUT_SCHEMA, **obj}
    out.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _poly(args, ring: SeriesRing, path: str) -> OrePoly:
    return _parse("Ore polynomial", path, lambda s: OrePoly.parse(ring, s))


# -- subcommands -------------------------------------------------------------------------------


def cmd_qe(args, out) -> int:
    if args.replay:
        text = _read(args.replay)
        try:
            same, regenerated = replay(text, _axioms_from(args.mode)[1] if args.mode else None)
        except ReplayMismatch as exc:
            out.write(f"replay mismatch: {exc}\n")
            return 1
        except (ValueError, KeyError) as exc:
            raise UserError(f"{args.replay}: not a trace: {exc}") from exc
        data = json.loads(regenerated)
        out.write(f"{data['result']}\n")
        out.write("replay: identical\n" if same else "replay: differs\n")
        return 0 if same else 1
    if not args.formula:
        raise UserError("qe needs --formula FILE or --replay FILE")
    mode, axioms = _axioms_from(args.mode)
    ring = _ring(args)
    phi = _parse("formula", args.formula, lambda s: parse_formula(ring, s))
    psi, trace = eliminate(phi, mode, axioms)
    out.write(f"{psi}\n")
    if psi.index_note:
        out.write(f"# {psi.index_note}\n")
    if args.trace:
        Path(args.trace).write_text(trace.dumps(), encoding="utf-8")
    return 0


def _axioms_from(mode: str):
    if mode.startswith("axioms:"):
        path = mode.split(":", 1)[1]
        lines = [ln.strip() for ln in _read(path).splitlines()]
        return "axioms", [ln for ln in lines if ln and not ln.startswith("#")]
    if mode not in MODES or mode == "axioms":
        raise UserError(f"unknown mode {mode!r} (use torsion-free, ttor or axioms:FILE)")
    return mode, None


def cmd_factor(args, out) -> int:
    ring = _ring(args)
    q = _poly(args, ring, args.poly)
    N = _precision(args)
    fac = factorize(q, N)
    prods = []
    acc = OrePoly.one(fac.ring)
    for f in fac.factors:
        acc = acc * f.as_poly()
        prods.append(acc)
    out.write(" * ".join(f"({f})" for f in fac.factors) + "\n")
    _emit(
        {
            "command": "factor",
            "field": fac.ring.field.spec(),
            "factors": [{"kind": f.kind, "poly": str(f)} for f in fac.factors],
            "precision": fmt_delta(fac.precision),
            "prefixes_in_I": fac.prefixes_in_I,
            "prefix_in_I": [p.in_I() for p in prods],
            "reaches_target": fac.reaches(N),
            "notes": fac.notes,
        },
        out,
    )
    return 0


def cmd_roots(args, out) -> int:
    ring = _ring(args)
    q = _poly(args, ring, args.poly)
    N = _precision(args)
    rs = roots_to_precision(q, N)
    for r in rs.roots:
        out.write(f"{r}\n")
    _emit(
        {
            "command": "roots",
            "field": rs.ring.field.spec(),
            "dimension": rs.dimension,
            "expected_dimension": rs.expected_dimension,
            "complete": rs.complete(),
            "defect": rs.defect,
            "basis": [str(b) for b in rs.basis],
            "residual_valuations": [fmt_delta(v) for v in rs.residuals],
            "notes": rs.notes,
        },
        out,
    )
    return 0


def cmd_divide(args, out) -> int:
    ring = _ring(args)
    q = _poly(args, ring, args.poly)
    n = _parse("series", args.rhs, ring.parse)
    res = divide_witness(n, q, _precision(args))
    qb = q
    nb = n
    if res.ring != ring:
        emb = embedding(ring.field, res.ring.field)
        qb, nb = q.embed(emb, res.ring), n.embed(emb, res.ring)
    resid = module_apply(res.x, qb) - nb
    out.write(f"{res.x}\n")
    _emit(
        {
            "command": "divide",
            "field": res.ring.field.spec(),
            "witness": str(res.x),
            "witness_valuation": fmt_delta(res.x.vlow()),
            "predicted_valuation": fmt_delta(upsilon(q.profile(), n.vlow())[0]),
            "residual_valuation": fmt_delta(resid.vlow()),
            "stalled": res.stalled,
        },
        out,
    )
    return 0


def cmd_ann(args, out) -> int:
    ring = _ring(args)
    q = _poly(args, ring, args.poly)
    vs = ann_value_set(q, _precision(args))
    out.write(" ".join(fmt_delta(v) for v in vs.values()) + "\n")
    _emit({"command": "ann", **vs.to_json(), "defect": vs.defect, "notes": vs.notes}, out)
    return 0


def cmd_divvals(args, out) -> int:
    ring = _ring(args)
    q = _poly(args, ring, args.poly)
    vs = div_value_set(q, _rational(args.delta), _precision(args))
    out.write(" ".join(fmt_delta(v) for v in vs.values()) + "\n")
    _emit({"command": "divvals", **vs.to_json(), "defect": vs.defect, "notes": vs.notes}, out)
    return 0


def cmd_upsilon(args, out) -> int:
    try:
        p = check_prime(int(args.p))
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    gammas = [g.strip() for g in args.profile.split(",")]
    prof = ValueProfile.from_gammas(p, [INF if g.lower() in ("inf", "oo") else _rational(g) for g in gammas])
    delta = _rational(args.delta)
    try:
        mu, idx = upsilon(prof, delta)
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    back = upsilon_inv(prof, mu)
    out.write(f"mu = {fmt_delta(mu)}\n")
    out.write(f"witness index = {idx}\n")
    out.write(f"round trip: upsilon_inv(q, {fmt_delta(mu)}) = {fmt_delta(back)} ({'ok' if back == delta else 'FAILED'})\n")
    return 0 if back == delta else 2


def cmd_check(args, out) -> int:
    ring = _ring(args)
    phi = _parse("formula", args.formula, lambda s: parse_formula(ring, s))
    psi = _parse("quantifier-free formula", args.against, lambda s: parse_qf(ring, s))
    rep = compare(phi, psi, samples=args.samples, seed=args.seed, N=_precision(args))
    _emit({"command": "check", **rep.to_json()}, out)
    return 0 if rep.ok() else 2


def cmd_selftest(args, out) -> int:
    from .report import run_corpus
    from .series_field import default_ring

    ok = True
    for ring in (default_ring(2, 2, "full"), default_ring(2, 1, "tame:3")):
        rep = check_axioms(ring, samples=args.axiom_samples, seed=args.seed)
        bad = [r.name for r in rep.results if r.failed]
        out.write(f"axioms {rep.ring}: {'pass' if not bad else 'FAIL ' + ', '.join(bad)}\n")
        ok = ok and not bad

    def progress(row):
        r = row.report
        status = "pass" if r.ok() else "FAIL"
        out.write(f"corpus {row.index:2d} {status} yes={r.yes} no={r.no} unknown={r.unknown} :: {row.entry.text}\n")
        out.flush()

    rows = run_corpus(samples=args.samples, seed=args.seed, N=_precision(args), progress=progress)
    ok = ok and all(r.report.ok() for r in rows)
    out.write("selftest: " + ("pass" if ok else "FAIL") + "\n")
    return 0 if ok else 2


def cmd_report(args, out) -> int:
    from .report import run_corpus, write_report

    rows = run_corpus(samples=args.samples, seed=args.seed, N=_precision(args))
    for path in write_report(rows, Path(args.out)):
        out.write(f"wrote {path}\n")
    return 0


# -- dispatch ----------------------------------------------------------------------------------


def build_parser(defaults: dict) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default=defaults["field"], help="coefficient field 'p', 'p^k' or 'p^k:c0,...,ck'")
    common.add_argument("--lattice", default=defaults["lattice"], help="exponent lattice 'full' or 'tame:L'")
    common.add_argument("--precision", default=defaults["precision"], help="target precision N")
    common.add_argument("--seed", type=int, default=int(defaults["seed"]))

    ap = argparse.ArgumentParser(prog="ore-qe", description="Quantifier elimination for Frobenius difference modules over valued fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qe", parents=[common], help="eliminate the quantifiers of a pp-formula")
    p.add_argument("--mode", default="ttor", help="torsion-free, ttor or axioms:FILE")
    p.add_argument("--formula", help="file holding the pp-formula")
    p.add_argument("--trace", help="write the JSON trace here")
    p.add_argument("--replay", help="replay a JSON trace and confirm it is byte-identical")
    p.set_defaults(fn=cmd_qe)

    for name, fn, hlp in (
        ("factor", cmd_factor, "factor an Ore polynomial in I into linear factors"),
        ("roots", cmd_roots, "annihilator of a separable Ore polynomial"),
        ("ann", cmd_ann, "valuations of annihilator elements"),
    ):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--poly", required=True, help="file holding the Ore polynomial")
        p.set_defaults(fn=fn)

    p = sub.add_parser("divide", parents=[common], help="m with m.q = n and w(m) = upsilon(q, w(n))")
    p.add_argument("--poly", required=True, help="file holding q")
    p.add_argument("--rhs", required=True, help="file holding the series n")
    p.set_defaults(fn=cmd_divide)

    p = sub.add_parser("divvals", parents=[common], help="valuations of m with w(m.q) >= delta")
    p.add_argument("--poly", required=True, help="file holding the Ore polynomial")
    p.add_argument("--delta", required=True)
    p.set_defaults(fn=cmd_divvals)

    p = sub.add_parser("upsilon", help="evaluate upsilon(q, delta) from a valuation profile")
    p.add_argument("--p", required=True)
    p.add_argument("--profile", required=True, help="comma separated coefficient valuations, 'inf' for zero")
    p.add_argument("--delta", required=True)
    p.set_defaults(fn=cmd_upsilon)

    p = sub.add_parser("check", parents=[common], help="compare a pp-formula with a quantifier-free formula on samples")
    p.add_argument("--formula", required=True)
    p.add_argument("--against", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("selftest", parents=[common], help="axiom suite plus corpus comparison")
    p.add_argument("--samples", type=int, default=50, help="samples per corpus formula")
    p.add_argument("--axiom-samples", type=int, default=500)
    p.set_defaults(fn=cmd_selftest)

    p = sub.add_parser("report", parents=[common], help="write the corpus report as CSV and PNG")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out", default="report", help="output directory")
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        ap = build_parser(_defaults())
    except UserError as exc:
        sys.stderr.write(f"ore-qe: {exc}\n")
        return 1
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.fn(args, out)
    except UserError as exc:
        sys.stderr.write(f"ore-qe: {exc}\n")
        return 1
    except InternalBreach as exc:
        sys.stderr.write(f"ore-qe: internal invariant breach: {exc}\n")
        if exc.trace is not None:
            sys.stderr.write(exc.trace.dumps())
        return 2
    except ParseError as exc:
        sys.stderr.write(f"ore-qe: {exc}\n")
        return 1
    except (NotSeparable, FactorizationDefect, SolveStall, LatticeDefect, PrecisionError, ExtensionCapError, ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"ore-qe: {type(exc).__name__}: {exc}\n")
        return 1
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1


if __name__ == "__main__":
    sys.exit(main())
