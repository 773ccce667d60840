"""Command line entry point: ``cyclorank <command> ...``.

Exit status is 0 on success, 1 for usage errors (bad arguments, unknown
curves, unreadable files) and 2 when a computation fails.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction

from . import curvedb
from .curve import CurveContext, EllipticCurveQ, SingularModel
from .iwasawa import (PrecisionInsufficient, ZpPowerSeries, leading_coefficient,
                      ord_at_zero, weierstrass_preparation)
from .padic import PadicError
from .report import build_condition_report, render
from .sieve import NumberFieldSpec, pi_scan, sigma_sieve

log = logging.getLogger("cyclorank")

PREC_ENV = "CYCLORANK_PRECISION"


class UsageError(Exception):
    pass


def _load_db(path):
    try:
        return curvedb.ingest_curves(path or curvedb.default_db_path())
    except FileNotFoundError as exc:
        raise UsageError(f"curve database not found: {exc.filename}") from exc
    except (curvedb.ParseError, curvedb.ValidationError) as exc:
        raise UsageError(f"curve database is invalid: {exc}") from exc


def resolve_curve(spec: str, db_path=None) -> tuple[EllipticCurveQ, CurveContext]:
    """A label from the database, or five comma separated a-invariants."""
    records = _load_db(db_path)
    if "," in spec or spec.startswith("["):
        try:
            ainvs = [int(v) for v in spec.strip("[]").split(",")]
            E = EllipticCurveQ.from_ainvs(ainvs)
        except (ValueError, SingularModel) as exc:
            raise UsageError(f"bad a-invariants {spec!r}: {exc}") from exc
        hit = curvedb.find_by_ainvs(E.ainvs, records)
        if hit is not None:
            return hit
        log.warning("curve %s not in the database: rank taken as 0", E.ainvs)
        return E, CurveContext(str(list(E.ainvs)), 0, [])
    try:
        return curvedb.find_curve(spec, records)
    except curvedb.NotFound as exc:
        raise UsageError(str(exc)) from exc


def _prime(text: str) -> int:
    import sympy
    p = int(text)
    if not sympy.isprime(p):
        raise argparse.ArgumentTypeError(f"{text} is not prime")
    return p


def _default_prec() -> int:
    try:
        return int(os.environ.get(PREC_ENV, "20"))
    except ValueError:
        return 20


def cmd_check(args) -> int:
    E, ctx = resolve_curve(args.curve, args.db)
    if args.prime == 2:
        raise UsageError("p must be odd")
    rep = build_condition_report(E, ctx, args.prime, args.prec)
    sys.stdout.write(render(rep, args.format))
    return 0


def cmd_scan(args) -> int:
    results = []
    failed = False
    for spec in args.curve:
        E, ctx = resolve_curve(spec, args.db)
        if ctx.rank < 1:
            raise UsageError(f"{ctx.label}: the scan needs a curve of positive rank")
        res = pi_scan(E, ctx, args.max_prime, args.prec, jobs=args.jobs)
        for d in res.diagnostics:
            if d.status == "error":
                failed = True
                print(f"{ctx.label} p={d.p}: {d.detail}", file=sys.stderr)
            elif d.status == "nonintegral" and args.verbose:
                print(f"{ctx.label} p={d.p}: val R_p = {d.valuation} ({d.detail})", file=sys.stderr)
        results.append(res)
    sys.stdout.write(render(results, args.format))
    return 2 if failed else 0


def cmd_sieve(args) -> int:
    E, ctx = resolve_curve(args.curve, args.db)
    try:
        K = NumberFieldSpec.parse(args.field_poly, args.closure_degree)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = sigma_sieve(E, ctx, K, args.max_prime)
    sys.stdout.write(render(rep, args.format))
    return 0


def cmd_prep(args) -> int:
    try:
        coeffs = [Fraction(c) for c in args.coeffs.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad coefficient list: {exc}") from exc
    trunc = max(args.truncation or len(coeffs), len(coeffs))
    try:
        f = ZpPowerSeries.from_rationals(args.prime, coeffs, args.prec, trunc)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    res = weierstrass_preparation(f)
    r = ord_at_zero(f)
    a_r = leading_coefficient(f)
    print(f"mu = {res.mu}")
    print(f"lambda = {res.lam}")
    print("distinguished = " + ", ".join(str(c) for c in res.distinguished))
    print(f"ord_T=0 = {r}")
    print(f"val(a_r) = {a_r.val}")
    return 0


def cmd_ingest(args) -> int:
    try:
        records = curvedb.ingest_curves(args.db)
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {args.db}") from exc
    except (curvedb.ParseError, curvedb.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for E, ctx in records:
        print(f"{ctx.label}\t{list(E.ainvs)}\trank {ctx.rank}")
    print(f"{len(records)} records")
    return 0


def cmd_fetch(args) -> int:
    try:
        E, ctx = curvedb.fetch_curve(args.label, args.endpoint)
    except curvedb.NotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (curvedb.NetworkError, curvedb.SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    import json
    print(json.dumps(curvedb.record_to_dict(E, ctx)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cyclorank", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, prec=True):
        p.add_argument("--db", default=None, help=f"curve records (default ${curvedb.DB_ENV} or bundled)")
        p.add_argument("--format", choices=("table", "structured"), default="table")
        if prec:
            p.add_argument("--prec", type=int, default=_default_prec())

    p = sub.add_parser("check", help="condition report for one curve and prime")
    p.add_argument("curve_pos", nargs="?", metavar="CURVE")
    p.add_argument("--curve")
    p.add_argument("--prime", type=_prime, required=True)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", help="primes p <= N dividing the normalized regulator")
    p.add_argument("--curve", action="append", required=True)
    p.add_argument("--max-prime", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--prec", type=int, default=10, help="p-adic digits (scans need few)")
    common(p, prec=False)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sieve", help="split-prime sieve for a number field")
    p.add_argument("--curve", required=True)
    p.add_argument("--field-poly", required=True)
    p.add_argument("--closure-degree", type=int, default=None)
    p.add_argument("--max-prime", type=int, required=True)
    common(p, prec=False)
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("prep", help="Weierstrass preparation of a power series")
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--coeffs", required=True, help="c0,c1,... (rationals prime to p)")
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--prec", type=int, default=_default_prec())
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("ingest", help="validate a curve record file")
    p.add_argument("--db", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fetch", help="fetch one curve from a remote database")
    p.add_argument("--label", required=True)
    p.add_argument("--endpoint", default=None, help=f"default ${curvedb.ENDPOINT_ENV} or the public site")
    p.set_defaults(func=cmd_fetch)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "check":
        args.curve = args.curve or args.curve_pos
        if not args.curve:
            parser.print_usage(sys.stderr)
            print("error: a curve is required", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PadicError, PrecisionInsufficient, ArithmeticError, ValueError) as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
