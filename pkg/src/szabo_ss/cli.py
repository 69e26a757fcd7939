"""Command-line entry point: ``szabo compute | verify | selftest``.

Exit codes: 0 ok, 2 input error, 3 resource limit, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import checks
from . import fixtures as F
from .complex import DEFAULT_MAX_GENERATORS, ResourceLimitError, build_complex, configure_threads
from .diagram import DiagramError, parse_pd, random_decoration, torus_link

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_VERIFY = 4


class InputError(Exception):
    pass


def _torus(text: str):
    try:
        p, q = (int(v) for v in text.replace("T(", "").rstrip(")").split(","))
    except ValueError:
        raise InputError(f"bad torus pair {text!r}; expected p,q") from None
    return torus_link(p, q)


def load_diagram(args) -> tuple[str, object]:
    if args.pd is not None:
        return "PD", parse_pd(args.pd)
    if args.torus is not None:
        return f"T({args.torus})", _torus(args.torus)
    try:
        fx = F.get(args.fixture)
    except KeyError as e:
        raise InputError(str(e)) from None
    return fx.name, fx.diagram()


def _part(args) -> str:
    if args.quotient:
        return "quotient"
    if args.unreduced:
        return "full"
    return "reduced"


def run_compute(args, out) -> int:
    label, d = load_diagram(args)
    part = _part(args)
    t = random_decoration(d, args.decoration_seed) if args.decoration_seed is not None else None
    bp = None
    if args.basepoint is not None:
        if args.basepoint not in d.edges:
            raise InputError(f"edge {args.basepoint} is not in the diagram")
        bp = d.base_point(args.basepoint)
    variant = "mirror" if args.mirror_d else "standard"
    from .spectral import compute_pages

    c = build_complex(d, t, variant, part, bp, max_generators=args.max_generators)
    seq = compute_pages(c, args.method, args.strategy)
    last = max(seq.collapse, 2)
    if args.json:
        pages = [seq.page(k) for k in range(0, last + 1)]
        doc = {
            "input": label,
            "crossings": d.n,
            "part": part,
            "variant": variant,
            "generators": len(c),
            "collapse": last,
            "pages": [{"k": p.k, "rank": p.rank, "poly": p.poly().to_json()} for p in pages],
        }
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return EXIT_OK
    out.write(f"{label} {part} {variant}: {d.n} crossings, {len(c)} generators\n")
    for k in range(2, last + 1):
        p = seq.page(k)
        name = f"E^{k}=E^inf" if k == last else f"E^{k}"
        out.write(f"rank {p.rank} {name}: {p.poly()}\n")
    return EXIT_OK


def run_verify(args, out) -> int:
    names = args.names or F.tabulated_names()
    unknown = [n for n in names if n not in F.tabulated_names()]
    if unknown:
        raise InputError(f"no table for {', '.join(unknown)}")
    results = []
    for n in names:
        t0 = time.perf_counter()
        r = checks.verify_fixture(n, perturb=args.perturb)
        results.append((r, time.perf_counter() - t0))
    failed = [r for r, _ in results if not r.passed]
    if args.json:
        doc = {"results": [{"name": r.name.split(" ", 1)[1], "passed": r.passed, "details": r.details}
                           for r, _ in results], "failed": len(failed)}
        out.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        for r, _ in results:
            out.write(r.line() + "\n")
        out.write(f"{len(results) - len(failed)}/{len(results)} tables reproduced\n")
    return EXIT_VERIFY if failed else EXIT_OK


def run_selftest(args, out) -> int:
    scopes = args.scope.split(",") if args.scope else None
    try:
        results = checks.selftest(scopes, args.max_crossings, args.seed)
    except KeyError as e:
        raise InputError(str(e)) from None
    for r in results:
        out.write(r.line() + "\n")
    passed = sum(r.passed for r in results)
    out.write(f"{passed}/{len(results)} suites passed, {sum(r.cases for r in results)} cases\n")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="szabo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="compute the pages of one diagram")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--pd", help='PD code, e.g. "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]"')
    src.add_argument("--torus", help="torus link p,q")
    src.add_argument("--fixture", help="embedded fixture name")
    part = c.add_mutually_exclusive_group()
    part.add_argument("--reduced", action="store_true", help="reduced complex (default)")
    part.add_argument("--unreduced", action="store_true", help="full complex")
    part.add_argument("--quotient", action="store_true", help="quotient by the reduced complex")
    c.add_argument("--mirror-d", action="store_true", help="use the mirror differential d'")
    c.add_argument("--basepoint", type=int, help="edge label carrying the marked point")
    c.add_argument("--decoration-seed", type=int, help="seeded random arc orientations")
    c.add_argument("--json", action="store_true")
    c.add_argument("--max-generators", type=int, default=DEFAULT_MAX_GENERATORS)
    c.add_argument("--method", choices=["auto", "cancel", "persistence"], default="auto")
    c.add_argument("--strategy", choices=["minfill", "first"], default="minfill")

    v = sub.add_parser("verify", help="compare against the embedded page tables")
    v.add_argument("names", nargs="*", help="table names (default: all)")
    v.add_argument("--perturb", action="store_true", help="corrupt each expected table (must fail)")
    v.add_argument("--json", action="store_true")

    s = sub.add_parser("selftest", help="run the invariant suites on small fixtures")
    s.add_argument("--scope", help="comma-separated: " + ",".join(checks.SUITES))
    s.add_argument("--max-crossings", type=int, default=7)
    s.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        configure_threads()
        if args.command == "compute":
            return run_compute(args, out)
        if args.command == "verify":
            return run_verify(args, out)
        return run_selftest(args, out)
    except (DiagramError, InputError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
