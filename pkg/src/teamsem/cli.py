"""``teamsem`` command line.

Exit codes: 0 satisfied / derivable / all checks pass, 1 the negative verdict,
2 usage, input or parse errors, 3 a search limit was hit.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from .core import ModelError, Structure, Team, load_json
from .dependencies import (
    FD,
    MVD,
    DependencyError,
    armstrong_derives,
    bfh_derives,
    join_decomposition_check,
    load_dependencies,
    parse_dependency,
    semantic_implies,
)
from .evaluator import EvalConfig, EvaluationError, Evaluator, SearchLimitExceeded, SearchLimits, semantic_value
from .judgments import builtin_registry, run_checks, select
from .quantifiers import QuantifierError, branch, branch_sher, load_quantifier, product
from .syntax import FormulaSyntaxError, Quant, free_variables, parse, to_text

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _config(args) -> EvalConfig:
    limits = SearchLimits.from_env()
    if args.max_rows is not None:
        limits = replace(limits, max_rows=args.max_rows)
    if args.max_domain is not None:
        limits = replace(limits, max_domain=args.max_domain)
    return EvalConfig(existential_mode=args.mode, nonmonotone_largeness=args.largeness, limits=limits)


def _read_json(path: str):
    try:
        return load_json(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _structure(path: str) -> Structure:
    return Structure.from_json(_read_json(path))


def _registry(args, M: Structure):
    reg = builtin_registry()
    for item in getattr(args, "define", None) or []:
        alias, sep, expr = item.partition("=")
        if not sep:
            raise UsageError(f"--define expects alias=expression, got {item!r}")
        reg.define(alias.strip(), expr.strip())
    for path in getattr(args, "quantifier", None) or []:
        data = _read_json(path)
        for item in data if isinstance(data, list) else [data]:
            load_quantifier(item, reg, M)
    return reg


def _emit(args, report: dict, lines: list):
    if args.json:
        print(json.dumps(report, ensure_ascii=False, indent=2))
    else:
        for line in lines:
            print(line)


def _witness_json(w):
    if w is None:
        return None
    return [{"row": dict(s), "values": sorted(list(t) for t in w(s))} for s in sorted(w.mapping)]


# ---------------------------------------------------------------- subcommands

def cmd_eval(args) -> int:
    M = _structure(args.structure)
    if sum([args.team is not None, args.empty_team, args.unit_team]) != 1:
        raise UsageError("give exactly one of a team file, --empty-team or --unit-team")
    reg = _registry(args, M)
    phi = parse(args.formula, reg)
    if args.team is not None:
        X = Team.from_json(_read_json(args.team))
    elif args.unit_team:
        X = Team.unit()
    else:
        X = Team.empty(sorted(free_variables(phi)))
    start = time.perf_counter()
    ev = Evaluator(M, reg, _config(args))
    verdict = ev.satisfies(X, phi)
    witness = None
    if args.witness and verdict and len(X) and isinstance(phi, Quant):
        witness = ev.witness(X, phi)
    elapsed = time.perf_counter() - start
    report = {"formula": to_text(phi), "team_rows": len(X), "satisfied": verdict,
              "witness": _witness_json(witness), "seconds": round(elapsed, 6)}
    lines = [f"{'satisfied' if verdict else 'not satisfied'}: {to_text(phi)}  ({len(X)} row(s), {elapsed:.3f}s)"]
    if witness is not None:
        lines.append(f"witness: {witness}")
    _emit(args, report, lines)
    return EXIT_YES if verdict else EXIT_NO


def cmd_imply(args) -> int:
    U, fds, mvds = load_dependencies(_read_json(args.deps))
    goal = parse_dependency(args.goal, U)
    start = time.perf_counter()
    if args.method == "armstrong":
        if mvds or not isinstance(goal, FD):
            raise UsageError("armstrong handles functional dependencies only")
        res = armstrong_derives(fds, goal, U)
        verdict, extra = bool(res), {"trace": list(res.trace)}
    elif args.method == "bfh":
        if fds or not isinstance(goal, MVD):
            raise UsageError("bfh handles multivalued dependencies only")
        res = bfh_derives(mvds, goal, U)
        verdict, extra = bool(res), {"trace": list(res.trace)}
    else:
        v = semantic_implies(fds + mvds, goal, U, domain_size=args.domain, max_rows=args.rows)
        verdict = v.valid_up_to_bounds
        extra = {"countermodel": v.countermodel.to_json() if v.countermodel is not None else None,
                 "teams_checked": v.teams_checked, "domain_size": args.domain, "max_rows": args.rows}
    elapsed = time.perf_counter() - start
    report = {"goal": str(goal), "method": args.method, "verdict": verdict, **extra, "seconds": round(elapsed, 6)}
    word = {"semantic": ("valid up to bounds", "refuted")}.get(args.method, ("derivable", "not derivable"))
    lines = [f"{word[0] if verdict else word[1]}: {goal}"]
    if args.verbose and "trace" in extra:
        lines += [f"  {step}" for step in extra["trace"]]
    if extra.get("countermodel") is not None:
        lines.append(f"countermodel: {v.countermodel}")
    _emit(args, report, lines)
    return EXIT_YES if verdict else EXIT_NO


def cmd_semvalue(args) -> int:
    M = _structure(args.structure)
    reg = _registry(args, M)
    phi = parse(args.formula, reg)
    cfg = _config(args)
    value = semantic_value(M, phi, cfg, reg)
    payload = {"vars": list(value.vars), "teams": [X.to_json() for X in value.teams]}
    if args.out:
        Path(args.out).write_text(json.dumps(payload, ensure_ascii=False, indent=1))
    report = {"formula": to_text(phi), "count": len(value), "out": args.out}
    lines = [f"{len(value)} team(s) over {list(value.vars)} satisfy {to_text(phi)}"]
    if not args.out and not args.json:
        lines += [f"  {X!r}" for X in value.teams]
    if not args.out and args.json:
        report["teams"] = payload["teams"]
    _emit(args, report, lines)
    return EXIT_YES


def cmd_paper_suite(args) -> int:
    checks = select(args.filter)
    if not checks:
        raise UsageError(f"no checks match {args.filter!r}")
    results = run_checks(checks)
    passed = sum(ok for _, ok, _ in results)
    report = {"passed": passed, "total": len(results),
              "checks": [{"name": c.name, "tags": list(c.tags), "statement": c.statement, "passed": ok, "detail": d}
                         for c, ok, d in results]}
    lines = []
    for c, ok, d in results:
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {c.name}: {c.statement}")
        if args.verbose or not ok:
            lines.append(f"       {d}")
    lines.append(f"{passed}/{len(results)} checks passed")
    _emit(args, report, lines)
    return EXIT_YES if passed == len(results) else EXIT_NO


def cmd_quant(args) -> int:
    M = Structure.of_size(args.size) if args.structure is None else _structure(args.structure)
    reg = _registry(args, M)
    if args.op == "show":
        Q = reg.instantiate(args.names[0], M)
    else:
        if len(args.names) != 2:
            raise UsageError(f"quant {args.op} needs two quantifier names")
        Q1, Q2 = (reg.instantiate(n, M) for n in args.names)
        Q = {"br": branch, "brS": branch_sher, "prod": product}[args.op](Q1, Q2)
    sets = [sorted(list(t) for t in s) for s in Q.sets]
    report = {"name": Q.name, "arity": Q.arity, "domain": list(Q.domain), "monotone": Q.monotone,
              "count": len(Q.sets), "sets": sets}
    lines = [f"{Q.name}: arity {Q.arity} on {list(Q.domain)}, {len(Q.sets)} set(s), "
             f"{'monotone' if Q.monotone else 'not monotone'}"]
    lines += ["  {" + ", ".join("(" + ",".join(t) + ")" for t in sorted(s)) + "}" for s in Q.sets]
    _emit(args, report, lines)
    return EXIT_YES


def cmd_join_check(args) -> int:
    X = Team.from_json(_read_json(args.team))
    lhs = [v for v in args.lhs.split(",") if v]
    rhs = [v for v in args.rhs.split(",") if v]
    verdict = join_decomposition_check(X, lhs, rhs)
    report = {"lhs": lhs, "rhs": rhs, "lossless": verdict}
    _emit(args, report, [f"{'lossless' if verdict else 'lossy'} join for {','.join(lhs)} ->> {','.join(rhs)}"])
    return EXIT_YES if verdict else EXIT_NO


_SHER_BODIES = ("R(x,y) & mvd(;x)", "R(x,y) | ind(;x;y)", "R(x,y) & mvd(x;y)", "R(x,y) | !R(y,x) & ind(;x;y)")


def cmd_sher_search(args) -> int:
    """Look for non-downward-closed bodies where the linear prefix holds but Br^S fails."""
    reg = builtin_registry()
    bodies = args.body or list(_SHER_BODIES)
    pairs = [tuple(p.split(",")) for p in args.pair] if args.pair else [("exists_eq_1", "exists"), ("exists", "exists_eq_1")]
    cfg = _config(args)
    found = []
    checked = 0
    for n in range(1, args.size + 1):
        points = list(itertools.product([str(i) for i in range(n)], repeat=2))
        for bits in range(1 << len(points)):
            R = [p for i, p in enumerate(points) if bits >> i & 1]
            M = Structure.of_size(n, {"R": (2, R)})
            ev = Evaluator(M, reg, cfg)
            for q1, q2 in pairs:
                for body in bodies:
                    lin = parse(f"Q[{q1}] x Q[{q2}] y/(x) ({body})", reg)
                    br = parse(f"Q[brS({q1},{q2})] x y ({body})", reg)
                    checked += 1
                    if ev.satisfies(Team.unit(), lin) and not ev.satisfies(Team.unit(), br):
                        found.append({"size": n, "R": R, "pair": [q1, q2], "body": body})
    report = {"checked": checked, "counterexamples": found}
    lines = [f"checked {checked} instance(s); {len(found)} counterexample(s) to the Br^S direction"]
    lines += [f"  |M|={c['size']} R={c['R']} {c['pair']} body {c['body']}" for c in found]
    _emit(args, report, lines)
    return EXIT_YES if not found else EXIT_NO


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["strict", "lax"], default="strict", help="existential quantifier semantics")
    common.add_argument("--largeness", choices=["corrected", "literal"], default="corrected",
                        help="largeness condition for non-monotone quantifiers")
    common.add_argument("--max-rows", type=int, default=None, help="largest team the search may build")
    common.add_argument("--max-domain", type=int, default=None, help="largest domain accepted")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="teamsem", description="Team semantics workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="decide M, X |= phi")
    e.add_argument("structure")
    e.add_argument("team", nargs="?", help="team JSON file (omit with --empty-team/--unit-team)")
    e.add_argument("formula")
    e.add_argument("--empty-team", action="store_true", help="evaluate on the empty team")
    e.add_argument("--unit-team", action="store_true", help="evaluate on {ε}")
    e.add_argument("--quantifier", action="append", help="JSON file with a custom local quantifier")
    e.add_argument("--define", action="append", help="alias=expression, e.g. b=br(exists,most_dom)")
    e.add_argument("--witness", action="store_true", help="print a witness for the top quantifier")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("imply", parents=[common], help="dependency implication")
    i.add_argument("deps")
    i.add_argument("goal", help='e.g. "x->z" or "x->>y,z"')
    i.add_argument("--method", choices=["armstrong", "bfh", "semantic"], default="semantic")
    i.add_argument("--domain", type=int, default=2, help="domain size for the semantic search")
    i.add_argument("--rows", type=int, default=4, help="maximum team size for the semantic search")
    i.set_defaults(func=cmd_imply)

    s = sub.add_parser("semvalue", parents=[common], help="all teams over FV(phi) that satisfy phi")
    s.add_argument("structure")
    s.add_argument("formula")
    s.add_argument("--out")
    s.add_argument("--quantifier", action="append")
    s.add_argument("--define", action="append")
    s.set_defaults(func=cmd_semvalue)

    ps = sub.add_parser("paper-suite", parents=[common], help="run the built-in judgments")
    ps.add_argument("--filter", help="tag or check name")
    ps.set_defaults(func=cmd_paper_suite)

    q = sub.add_parser("quant", parents=[common], help="show or construct local quantifier tables")
    q.add_argument("op", choices=["show", "br", "brS", "prod"])
    q.add_argument("names", nargs="+")
    q.add_argument("--size", type=int, default=2, help="domain size when no structure is given")
    q.add_argument("--structure")
    q.add_argument("--define", action="append")
    q.add_argument("--quantifier", action="append")
    q.set_defaults(func=cmd_quant)

    j = sub.add_parser("join-check", parents=[common], help="is X the join of its projections on xy and xz?")
    j.add_argument("team")
    j.add_argument("lhs", help="comma-separated x̄")
    j.add_argument("rhs", help="comma-separated ȳ")
    j.set_defaults(func=cmd_join_check)

    sh = sub.add_parser("sher-search", parents=[common],
                        help="hunt for non-downward-closed counterexamples to the Br^S direction")
    sh.add_argument("--size", type=int, default=2, help="largest domain size to try")
    sh.add_argument("--pair", action="append", help="q1,q2 (repeatable)")
    sh.add_argument("--body", action="append", help="body over x,y and R (repeatable)")
    sh.set_defaults(func=cmd_sher_search)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SearchLimitExceeded as exc:
        print(f"teamsem: resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except FormulaSyntaxError as exc:
        print(f"teamsem: parse error: {exc}", file=sys.stderr)
        if exc.text is not None and exc.position is not None:
            print(f"  {exc.text}\n  {' ' * exc.position}^", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ModelError, EvaluationError, QuantifierError, DependencyError, ValueError, OSError) as exc:
        print(f"teamsem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
