"""``condstate`` command line.

Exit codes: 0 success, 1 parse/usage error, 2 validation failure (including a
failed embedded check), 3 numerical-domain error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import NumericalDomainError, ParseError, ValidationError
from .linalg import DEFAULT_TOL
from .scenario import Report, parse_scenario, run_text
from .verify import DEFAULT_COUNTS, SUITES, run_suites

DEFAULT_SEED = 0

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_DOMAIN = 0, 1, 2, 3


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("CONDSTATE_SEED")
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise ParseError(f"CONDSTATE_SEED must be an integer, got {env!r}") from None


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _emit(report: Report) -> int:
    print(report.dumps())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_run(args) -> int:
    seed = resolve_seed(args.seed)
    return _emit(run_text(_read(args.file), seed=seed, tol_override=args.tol))


def cmd_validate(args) -> int:
    sc = parse_scenario(_read(args.file), seed=resolve_seed(args.seed))
    rep = Report("validate", seed=resolve_seed(args.seed) if sc.used_randomness else None)
    rep.outputs["objects"] = {name: type(obj).__name__ for name, obj in sorted(sc.objects.items())}
    rep.outputs["scenario_task"] = sc.task
    return _emit(rep)


def cmd_verify(args) -> int:
    seed = resolve_seed(args.seed)
    names = args.suite or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ParseError(f"unknown suite(s) {', '.join(unknown)}; available: {', '.join(SUITES)}")
    results = run_suites(names, seed, args.count)
    rep = Report("verify", seed=seed)
    rep.outputs["suites"] = {
        n: {
            "count": DEFAULT_COUNTS[n] if args.count is None else args.count,
            "passed": sum(c.passed for c in cs),
            "checks": len(cs),
        }
        for n, cs in results.items()
    }
    for cs in results.values():
        rep.checks.extend(cs)
    return _emit(rep)


def cmd_demo(args) -> int:
    from .demos import DEMOS, run_demo

    if args.name not in DEMOS:
        print(f"unknown demo {args.name!r}; available demos:", file=sys.stderr)
        for n in DEMOS:
            print(f"  {n}", file=sys.stderr)
        return EXIT_PARSE
    seed = resolve_seed(args.seed) if args.name == "alt-conditionals" else None
    rep = run_demo(args.name, DEFAULT_TOL, seed)
    verdict = rep.outputs.get("verdict")
    if verdict:
        print(f"verdict: {verdict}", file=sys.stderr)
    return _emit(rep)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="condstate", description="Quantum conditional-state inference.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a scenario file and print its report")
    r.add_argument("file")
    r.add_argument("--seed", type=int)
    r.add_argument("--tol", type=float, help="override the equality tolerance (eq_tol)")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="parse and validate a scenario without running its task")
    v.add_argument("file")
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_validate)

    ver = sub.add_parser("verify", help="run the property suites")
    ver.add_argument("--suite", action="append", metavar="NAME", help=f"one of: {', '.join(SUITES)} (repeatable)")
    ver.add_argument("--seed", type=int)
    ver.add_argument("--count", type=int, help="instances per suite (default depends on the suite)")
    ver.set_defaults(func=cmd_verify)

    d = sub.add_parser("demo", help="run a named worked example")
    d.add_argument("name")
    d.add_argument("--seed", type=int)
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, IndexError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalDomainError as exc:
        print(f"numerical domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
