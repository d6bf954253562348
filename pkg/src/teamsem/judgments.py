"""Deterministic named checks: the concrete judgments the library must reproduce.

Each check has tags (used by ``teamsem paper-suite --filter``), a one-line
statement of what is being asserted, and a function returning ``(passed, detail)``.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable
from dataclasses import dataclass

from .core import Structure, Team
from .dependencies import FD, MVD, armstrong_derives, bfh_derives, mvd_holds, semantic_implies
from .evaluator import CORRECTED, LITERAL, EvalConfig, satisfies, semantic_value, sentence_truth
from .quantifiers import DEFAULT_REGISTRY, QuantifierRegistry
from .syntax import parse

BRANCHING_R = frozenset({("0", "0")} | {(a, b) for a in "01" for b in "12"})
SPLIT_S = frozenset({(a, b) for a in "01" for b in "01"} | {("2", "1"), ("2", "2")})


def builtin_registry() -> QuantifierRegistry:
    reg = DEFAULT_REGISTRY.copy()
    reg.define("brS_e1_e", "brS(exists_eq_1,exists)")
    return reg


def branching_structure() -> Structure:
    return Structure.of_size(3, {"R": (2, BRANCHING_R)})


@dataclass(frozen=True)
class Check:
    name: str
    tags: tuple
    statement: str
    run: Callable[[], tuple]


def _expect_sentences(M: Structure, cases: Iterable, cfg: EvalConfig | None = None, registry=None):
    registry = registry or builtin_registry()
    lines, ok = [], True
    for text, want in cases:
        got = sentence_truth(M, parse(text, registry), cfg, registry)
        ok &= got == want
        lines.append(f"{text} -> {got} (expected {want})")
    return ok, "; ".join(lines)


def _signaling():
    out, ok = [], True
    for n in (2, 3):
        good, detail = _expect_sentences(
            Structure.of_size(n),
            [("forall x exists y/(x) x=y", False), ("forall x exists z exists y/(x) x=y", True)],
        )
        ok &= good
        out.append(f"|M|={n}: {detail}")
    return ok, " | ".join(out)


def _full_team_dep():
    M = Structure.of_size(2)
    full = Team.from_rows(("x", "y"), itertools.product(M.domain, repeat=2))
    pos = satisfies(M, full, parse("dep(x;y)"))
    neg = satisfies(M, full, parse("!dep(x;y)"))
    ok2, d2 = _expect_sentences(M, [("forall x y (dep(x;y) | !dep(x;y))", False)])
    ok1, d1 = _expect_sentences(Structure.of_size(1), [("forall x y (dep(x;y) | !dep(x;y))", True)])
    return (not pos and not neg and ok1 and ok2,
            f"full team: dep={pos}, !dep={neg}; |M|=2: {d2}; |M|=1: {d1}")


def _empty_team():
    M = branching_structure()
    reg = builtin_registry()
    texts = ["!dep(;x)", "R(x,x) & !R(x,x)", "Q[exists_eq_1] y/(x) R(x,y)", "mvd(x;x)"]
    results = [satisfies(M, Team.empty(("x",)), parse(t, reg), registry=reg) for t in texts]
    unit_neg = satisfies(M, Team.unit(), parse("exists x !dep(;x)"))
    return all(results) and not unit_neg, f"empty team: {results}; {{ε}} ⊨ exists x !dep(;x): {unit_neg}"


def _on_branching_relation(text: str, want: bool):
    return lambda: _expect_sentences(branching_structure(), [(text, want)])


def _atom_impossibility():
    full = Structure.of_size(3, {"R": (2, itertools.product("012", repeat=2))})
    ok1, d1 = _expect_sentences(full, [("forall x Q[exists_geq_3] y\\() R(x,y)", True)])
    ok2, d2 = _expect_sentences(Structure.of_size(3, {"R": (2, SPLIT_S)}),
                                [("forall x Q[exists_geq_2] y\\() R(x,y)", False)])
    return ok1 and ok2, f"R=M²: {d1}; R=S: {d2}"


def _mvd_restriction():
    M = Structure.of_size(2)
    value = semantic_value(M, parse("mvd(;x)"))
    total = 1 << M.size
    return len(value) == total, f"{len(value)} of {total} teams over {{x}} satisfy mvd(;x)"


def _mvd_context():
    # mvd(x;y) reads the remaining columns from the team: adding a column can break it
    M = Structure.of_size(2)
    X = Team.from_rows(("x", "y"), [("0", "0"), ("0", "1")])
    Y = Team.from_rows(("x", "y", "z"), [("0", "0", "0"), ("0", "1", "1")])
    a, b = mvd_holds(X, ("x",), ("y",)), mvd_holds(Y, ("x",), ("y",))
    phi = satisfies(M, Y, parse("mvd(x;y)"))
    return a and not b and not phi, f"over {{x,y}}: {a}; with z added: {b}"


def _limited_largeness():
    M = Structure.of_size(2, {"P": (1, [("0",), ("1",)])})
    phi = parse("Q[exists_eq_1] x P(x)")
    cor = sentence_truth(M, phi, EvalConfig(nonmonotone_largeness=CORRECTED))
    lit = sentence_truth(M, phi, EvalConfig(nonmonotone_largeness=LITERAL))
    return (not cor) and lit, f"P=M, exactly-one x P(x): corrected={cor}, literal={lit}"


def _forall_oddity():
    M = Structure.of_size(2)
    X = Team.unit()
    a = satisfies(M, X, parse("forall x\\() x=x"))
    b = satisfies(M, X, parse("forall x (dep(;x) & x=x)"))
    return a and not b, f"forall x\\() x=x: {a}; forall x (dep(;x) & x=x): {b}"


def _armstrong_transitivity():
    res = armstrong_derives([FD({"x"}, {"y"}), FD({"y"}, {"z"})], FD({"x"}, {"z"}), {"x", "y", "z"})
    return bool(res), f"{{x->y, y->z}} |- x->z: {bool(res)}"


def _bfh_complementation():
    U = {"x", "y", "z"}
    res = bfh_derives([MVD({"x"}, {"y"}, U)], MVD({"x"}, {"z"}, U), U)
    return bool(res), f"{{x->>y}} |- x->>z over xyz: {bool(res)}"


def _mvd_nonsplitting():
    U = {"x", "y", "z", "w"}
    goal = MVD({"x"}, {"y"}, U)
    syn = bfh_derives([MVD({"x"}, {"y", "z"}, U)], goal, U)
    verdict = semantic_implies([MVD({"x"}, {"y", "z"}, U)], goal, U, domain_size=2, max_rows=4)
    cm = verdict.countermodel
    return (not syn and not verdict.valid_up_to_bounds and cm is not None,
            f"{{x->>yz}} |- x->>y: {bool(syn)}; countermodel: {cm}")


CHECKS: tuple = (
    Check("signaling", ("signaling", "if"), "forall x exists y/(x) x=y fails, adding a signalling z restores it, for 2 <= |M| <= 3", _signaling),
    Check("dep-excluded-middle", ("dependence", "negation"), "the full team satisfies neither dep(x;y) nor !dep(x;y)", _full_team_dep),
    Check("empty-team", ("empty", "dependence"), "every formula holds on the empty team; {ε} is not the empty team", _empty_team),
    Check("fig1-linear", ("fig1", "nonmonotone"), "exactly-one x, exists y/(x) R(x,y) is false",
          _on_branching_relation("Q[exists_eq_1] x exists y/(x) R(x,y)", False)),
    Check("fig1-swapped", ("fig1", "nonmonotone"), "exists y, exactly-one x/(y) R(x,y) is true",
          _on_branching_relation("exists y Q[exists_eq_1] x/(y) R(x,y)", True)),
    Check("fig1-sher", ("fig1", "sher"), "Br^S(exactly-one, exists) x y R(x,y) is true",
          _on_branching_relation("Q[brS_e1_e] x y R(x,y)", True)),
    Check("largeness-literal", ("nonmonotone", "largeness"), "the literal largeness reading accepts a witness the corrected reading rejects", _limited_largeness),
    Check("atom-impossibility", ("mvd", "atoms"), "forall x Q y\\() R(x,y) separates M² from S", _atom_impossibility),
    Check("mvd-restriction", ("mvd",), "mvd(;x) over the single variable x holds on every team", _mvd_restriction),
    Check("mvd-context", ("mvd",), "the truth of mvd(x;y) depends on the other columns of the team", _mvd_context),
    Check("mvd-nonsplitting", ("mvd", "inference"), "x->>yz does not imply x->>y", _mvd_nonsplitting),
    Check("forall-oddity", ("backslash", "dependence"), "forall x\\() differs from forall x (dep(;x) & ...)", _forall_oddity),
    Check("armstrong-transitivity", ("inference", "fd"), "x->y and y->z derive x->z", _armstrong_transitivity),
    Check("bfh-complementation", ("inference", "mvd"), "x->>y derives x->>z when U = xyz", _bfh_complementation),
)


def select(tag: str | None = None) -> list:
    if not tag:
        return list(CHECKS)
    return [c for c in CHECKS if tag in c.tags or c.name == tag]


def run_checks(checks: Iterable[Check]) -> list:
    results = []
    for c in checks:
        try:
            ok, detail = c.run()
        except Exception as exc:  # a crash is reported as a failed check
            ok, detail = False, f"error: {exc!r}"
        results.append((c, bool(ok), detail))
    return results
