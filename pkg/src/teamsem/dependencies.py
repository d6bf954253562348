"""Functional and multivalued dependencies over teams.

Covers team-level checks of the three dependency kinds, Armstrong closure for
FDs, Beeri–Fagin–Howard saturation for MVDs, and bounded semantic implication
by exhaustive countermodel search.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from .core import ModelError, Team, natural_join, restrict_team


class DependencyError(ValueError):
    pass


def _vs(xs: Iterable) -> frozenset:
    if isinstance(xs, str):
        xs = [xs]
    return frozenset(xs)


def _fmt(vs: Iterable) -> str:
    return ",".join(sorted(vs)) or "ε"


@dataclass(frozen=True)
class FD:
    lhs: frozenset
    rhs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "lhs", _vs(self.lhs))
        object.__setattr__(self, "rhs", _vs(self.rhs))

    @property
    def variables(self) -> frozenset:
        return self.lhs | self.rhs

    def __str__(self):
        return f"{_fmt(self.lhs)}->{_fmt(self.rhs)}"


@dataclass(frozen=True)
class MVD:
    lhs: frozenset
    rhs: frozenset
    universe: frozenset = field(default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "lhs", _vs(self.lhs))
        object.__setattr__(self, "rhs", _vs(self.rhs))
        object.__setattr__(self, "universe", _vs(self.universe))
        if self.universe and not (self.lhs | self.rhs) <= self.universe:
            raise DependencyError(f"{self} mentions variables outside its universe {_fmt(self.universe)}")

    @property
    def variables(self) -> frozenset:
        return self.lhs | self.rhs

    def __str__(self):
        return f"{_fmt(self.lhs)}->>{_fmt(self.rhs)}"


@dataclass(frozen=True)
class IndepStatement:
    """``left ⊥_cond right``."""

    cond: frozenset
    left: frozenset
    right: frozenset

    def __post_init__(self):
        for name in ("cond", "left", "right"):
            object.__setattr__(self, name, _vs(getattr(self, name)))

    @property
    def variables(self) -> frozenset:
        return self.cond | self.left | self.right

    def __str__(self):
        return f"{_fmt(self.left)} _|_[{_fmt(self.cond)}] {_fmt(self.right)}"


# ---------------------------------------------------------------- team checks

def _check_vars(X: Team, variables: Iterable):
    missing = set(variables) - set(X.vars)
    if missing:
        raise ModelError(f"unknown variable(s) {sorted(missing)} for team over {list(X.vars)}")


def fd_holds(X: Team, lhs: Sequence, rhs: Sequence) -> bool:
    key, val = X.column(tuple(lhs)), X.column(tuple(rhs))
    seen: dict = {}
    for r in X.rows:
        k, v = key(r), val(r)
        if seen.setdefault(k, v) != v:
            return False
    return True


def mvd_holds(X: Team, lhs: Sequence, rhs: Sequence) -> bool:
    """Possible-values form: ``X^ȳ_{s↾x̄} = X^ȳ_{s↾x̄z̄}`` for every row, ``z̄`` the rest of ``dom(X)``."""
    lhs, rhs = tuple(lhs), tuple(rhs)
    rest = tuple(v for v in X.vars if v not in set(lhs) | set(rhs))
    kx, kxz, ky = X.column(lhs), X.column(lhs + rest), X.column(rhs)
    by_x: dict = {}
    by_xz: dict = {}
    for r in X.rows:
        by_x.setdefault(kx(r), set()).add(ky(r))
        by_xz.setdefault(kxz(r), set()).add(ky(r))
    return all(by_x[kx(r)] == by_xz[kxz(r)] for r in X.rows)


def indep_holds(X: Team, cond: Sequence, left: Sequence, right: Sequence) -> bool:
    """``∀s,s′ (s(x̄)=s′(x̄) → ∃s₀ (s₀(x̄ȳ)=s(x̄ȳ) ∧ s₀(z̄)=s′(z̄)))``."""
    cond, left, right = tuple(cond), tuple(left), tuple(right)
    kx, kxy, kz = X.column(cond), X.column(cond + left), X.column(right)
    present = {(kxy(r), kz(r)) for r in X.rows}
    groups: dict = {}
    for r in X.rows:
        g = groups.setdefault(kx(r), (set(), set()))
        g[0].add(kxy(r))
        g[1].add(kz(r))
    return all((a, b) in present for xs, zs in groups.values() for a in xs for b in zs)


def team_satisfies_fd(X: Team, d: FD) -> bool:
    _check_vars(X, d.variables)
    return fd_holds(X, sorted(d.lhs), sorted(d.rhs))


def team_satisfies_mvd(X: Team, d: MVD) -> bool:
    if d.universe and set(d.universe) != set(X.vars):
        raise DependencyError(f"universe {_fmt(d.universe)} differs from team domain {_fmt(X.vars)}")
    _check_vars(X, d.variables)
    return mvd_holds(X, sorted(d.lhs), sorted(d.rhs))


def team_satisfies_indep(X: Team, a: IndepStatement) -> bool:
    _check_vars(X, a.variables)
    return indep_holds(X, sorted(a.cond), sorted(a.left), sorted(a.right))


def team_satisfies(X: Team, d) -> bool:
    if isinstance(d, FD):
        return team_satisfies_fd(X, d)
    if isinstance(d, MVD):
        return team_satisfies_mvd(X, d)
    if isinstance(d, IndepStatement):
        return team_satisfies_indep(X, d)
    raise TypeError(f"not a dependency: {d!r}")


def join_decomposition_check(X: Team, lhs: Iterable, rhs: Iterable) -> bool:
    """Whether ``X = (X↾x̄ȳ) ⋈ (X↾x̄z̄)`` with ``z̄ = dom(X) ∖ x̄ȳ``."""
    lhs, rhs = set(lhs), set(rhs)
    _check_vars(X, lhs | rhs)
    rest = set(X.vars) - lhs - rhs
    joined = natural_join(restrict_team(X, lhs | rhs), restrict_team(X, lhs | rest))
    return joined == X


# ---------------------------------------------------------------- inference

@dataclass(frozen=True)
class InferenceResult:
    derivable: bool
    trace: tuple

    def __bool__(self):
        return self.derivable


def armstrong_derives(D: Iterable[FD], goal: FD, universe: Iterable) -> InferenceResult:
    """FD derivability via attribute closure of ``goal.lhs``."""
    U = _vs(universe)
    D = list(D)
    for d in D + [goal]:
        if not d.variables <= U:
            raise DependencyError(f"{d} mentions variables outside the universe {_fmt(U)}")
    closure = set(goal.lhs)
    trace = [f"start: closure({_fmt(goal.lhs)}) ⊇ {{{_fmt(closure)}}} by reflexivity"]
    changed = True
    while changed:
        changed = False
        for d in D:
            if d.lhs <= closure and not d.rhs <= closure:
                closure |= d.rhs
                trace.append(f"apply {d}: closure = {{{_fmt(closure)}}}")
                changed = True
    ok = goal.rhs <= closure
    trace.append(f"{'derivable' if ok else 'not derivable'}: {_fmt(goal.rhs)} "
                 f"{'⊆' if ok else '⊄'} {{{_fmt(closure)}}}")
    return InferenceResult(ok, tuple(trace))


class _Bits:
    def __init__(self, universe: Iterable):
        self.names = sorted(universe)
        self.pos = {v: i for i, v in enumerate(self.names)}
        self.full = (1 << len(self.names)) - 1

    def mask(self, vs: Iterable) -> int:
        m = 0
        for v in vs:
            m |= 1 << self.pos[v]
        return m

    def names_of(self, m: int) -> frozenset:
        return frozenset(v for v, i in self.pos.items() if m >> i & 1)

    def subsets(self, m: int) -> Iterator[int]:
        sub = m
        while True:
            yield sub
            if sub == 0:
                return
            sub = (sub - 1) & m


def bfh_closure(D: Iterable[MVD], universe: Iterable) -> dict:
    """Saturate ``D`` under complementation, reflexivity, augmentation and transitivity.

    Returns every derivable ``(lhs, rhs)`` pair of frozensets mapped to the
    rule and premises that first produced it.
    """
    U = _vs(universe)
    bits = _Bits(U)
    D = list(D)
    for d in D:
        if d.universe and d.universe != U:
            raise DependencyError(f"{d} has universe {_fmt(d.universe)}, expected {_fmt(U)}")
        if not d.variables <= U:
            raise DependencyError(f"{d} mentions variables outside the universe {_fmt(U)}")
    full = bits.full
    why: dict = {}
    by_lhs: dict = {}
    by_rhs: dict = {}
    work: list = []

    def add(x: int, y: int, reason):
        if (x, y) in why:
            return
        why[(x, y)] = reason
        by_lhs.setdefault(x, set()).add(y)
        by_rhs.setdefault(y, set()).add(x)
        work.append((x, y))

    for d in D:
        add(bits.mask(d.lhs), bits.mask(d.rhs), ("given",))
    for x in range(full + 1):
        for y in bits.subsets(x):
            add(x, y, ("reflexivity",))
    while work:
        x, y = work.pop()
        premise = (x, y)
        # complementation: z ⊇ U∖(x∪y), z∩y ⊆ x
        base = full & ~(x | y)
        for extra in bits.subsets(x):
            add(x, base | extra, ("complementation", premise))
        # augmentation
        for z in range(full + 1):
            add(x | z, y | z, ("augmentation", premise, z))
        # transitivity with (x,y) first: y->>z gives x->>z∖y
        for z in list(by_lhs.get(y, ())):
            add(x, z & ~y, ("transitivity", premise, (y, z)))
        # transitivity with (x,y) second: w->>x gives w->>y∖x
        for w in list(by_rhs.get(x, ())):
            add(w, y & ~x, ("transitivity", (w, x), premise))
    return {(bits.names_of(x), bits.names_of(y)): _named(bits, r) for (x, y), r in why.items()}


def _named(bits: _Bits, reason: tuple) -> tuple:
    out = [reason[0]]
    for part in reason[1:]:
        if isinstance(part, tuple):
            out.append((bits.names_of(part[0]), bits.names_of(part[1])))
        else:
            out.append(bits.names_of(part))
    return tuple(out)


def bfh_derives(D: Iterable[MVD], goal: MVD, universe: Iterable) -> InferenceResult:
    """MVD derivability by saturation under the four Beeri–Fagin–Howard rules."""
    U = _vs(universe)
    if goal.universe and goal.universe != U:
        raise DependencyError(f"goal has universe {_fmt(goal.universe)}, expected {_fmt(U)}")
    if not goal.variables <= U:
        raise DependencyError(f"{goal} mentions variables outside the universe {_fmt(U)}")
    closure = bfh_closure(D, U)
    key = (goal.lhs, goal.rhs)
    if key not in closure:
        return InferenceResult(False, (f"{goal} is not among the {len(closure)} derivable MVDs over {_fmt(U)}",))
    return InferenceResult(True, tuple(_derivation(closure, key)))


def _derivation(closure: dict, key) -> list:
    lines: list = []
    seen: set = set()

    def show(k):
        return f"{_fmt(k[0])}->>{_fmt(k[1])}"

    def visit(k):
        if k in seen:
            return
        seen.add(k)
        reason = closure[k]
        rule = reason[0]
        premises = [p for p in reason[1:] if isinstance(p, tuple)]
        for p in premises:
            visit(p)
        detail = ""
        if rule == "augmentation":
            detail = f" with {_fmt(reason[2])}"
        if premises:
            detail += " from " + ", ".join(show(p) for p in premises)
        lines.append(f"{show(k)}  [{rule}{detail}]")

    visit(key)
    return lines


# ---------------------------------------------------------------- semantic implication

@dataclass(frozen=True)
class Verdict:
    """Outcome of a bounded countermodel search; never a claim of unbounded validity."""

    valid_up_to_bounds: bool
    countermodel: Team | None
    domain_size: int
    max_rows: int
    teams_checked: int

    def __bool__(self):
        return self.valid_up_to_bounds


def _restricted_growth(length: int, labels: int) -> list:
    """Sequences where each value is at most one more than the running maximum."""
    out = []

    def grow(prefix, top):
        if len(prefix) == length:
            out.append(tuple(prefix))
            return
        for v in range(min(top + 2, labels)):
            grow(prefix + [v], max(top, v))

    grow([], -1)
    return out


def candidate_teams(universe: Iterable, domain_size: int, max_rows: int) -> Iterator[Team]:
    """Teams over ``universe`` with values in ``{0..d-1}`` and at most ``max_rows`` rows.

    Each column is enumerated only up to a renaming of its values (first
    occurrence order), which preserves every FD, MVD and independence
    statement. Teams come out by increasing row count; the empty team is
    skipped since it satisfies everything.
    """
    U = sorted(_vs(universe))
    for m in range(1, max_rows + 1):
        cols = _restricted_growth(m, domain_size)
        seen: set = set()
        for combo in itertools.product(cols, repeat=len(U)):
            rows = frozenset(tuple(str(c[i]) for c in combo) for i in range(m))
            if len(rows) != m or rows in seen:
                continue
            seen.add(rows)
            yield Team._make(tuple(U), rows)


MAX_SEARCH = 2_000_000


def semantic_implies(D: Iterable, goal, universe: Iterable, domain_size: int = 2, max_rows: int = 4) -> Verdict:
    """Search teams over ``universe`` for one satisfying ``D`` but not ``goal``."""
    U = _vs(universe)
    D = [_with_universe(d, U) for d in D]
    goal = _with_universe(goal, U)
    for d in D + [goal]:
        if not d.variables <= U:
            raise DependencyError(f"{d} mentions variables outside the universe {_fmt(U)}")
    if domain_size < 1 or max_rows < 0:
        raise DependencyError("bounds must be positive")
    per_col = len(_restricted_growth(max_rows, domain_size)) if max_rows else 0
    if per_col ** len(U) > MAX_SEARCH:
        raise DependencyError(f"search space {per_col}^{len(U)} exceeds {MAX_SEARCH} candidates")
    checked = 0
    for X in candidate_teams(U, domain_size, max_rows):
        checked += 1
        if all(team_satisfies(X, d) for d in D) and not team_satisfies(X, goal):
            return Verdict(False, X, domain_size, max_rows, checked)
    return Verdict(True, None, domain_size, max_rows, checked)


def _with_universe(d, U: frozenset):
    if isinstance(d, MVD):
        if d.universe and d.universe != U:
            raise DependencyError(f"{d} has universe {_fmt(d.universe)}, expected {_fmt(U)}")
        return MVD(d.lhs, d.rhs, U)
    return d


# ---------------------------------------------------------------- text / JSON forms

_STMT = re.compile(r"^\s*([^->]*?)\s*(->>|->)\s*([^->]*?)\s*$")


def _names(text: str) -> frozenset:
    text = text.strip()
    if text in ("", "ε", "eps", "_"):
        return frozenset()
    return frozenset(v.strip() for v in text.split(",") if v.strip())


def parse_dependency(text: str, universe: Iterable = ()):
    """``"x,y->z"`` is an FD, ``"x->>y,z"`` an MVD; an empty side is written ``""`` or ``ε``."""
    m = _STMT.match(text)
    if not m:
        raise DependencyError(f"cannot parse dependency {text!r}")
    lhs, arrow, rhs = _names(m.group(1)), m.group(2), _names(m.group(3))
    if arrow == "->":
        return FD(lhs, rhs)
    return MVD(lhs, rhs, _vs(universe))


def load_dependencies(data: Mapping) -> tuple:
    """``(universe, [FD...], [MVD...])`` from the dependency file format."""
    try:
        U = frozenset(data["universe"])
        fds = [FD(frozenset(d["lhs"]), frozenset(d["rhs"])) for d in data.get("fds", [])]
        mvds = [MVD(frozenset(d["lhs"]), frozenset(d["rhs"]), U) for d in data.get("mvds", [])]
    except (KeyError, TypeError) as exc:
        raise DependencyError(f"bad dependency data: {exc}") from exc
    return U, fds, mvds
