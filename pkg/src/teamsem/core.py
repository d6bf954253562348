"""Finite structures, assignments and teams.

Elements are opaque strings. A team stores its variables in lexicographic
order and its rows as a frozenset of value tuples aligned with that order, so
two teams are equal exactly when they have the same variables and the same
rows. The empty team over ``vars`` and the unit team ``{ε}`` (no variables,
one empty row) are different values.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

Element = str
Row = tuple  # tuple of Element aligned with Team.vars


class ModelError(ValueError):
    """Malformed structure, team or assignment data."""


@dataclass(frozen=True)
class Relation:
    arity: int
    tuples: frozenset

    def __post_init__(self):
        if self.arity < 0:
            raise ModelError(f"negative arity {self.arity}")
        for t in self.tuples:
            if len(t) != self.arity:
                raise ModelError(f"tuple {t} does not have arity {self.arity}")


@dataclass(frozen=True, eq=True)
class Structure:
    domain: tuple
    relations: Mapping = field(default_factory=dict)
    constants: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(str(a) for a in self.domain))
        if len(set(self.domain)) != len(self.domain):
            raise ModelError("domain elements must be distinct")
        if not self.domain:
            raise ModelError("domain must be non-empty")
        rels = {}
        for name, rel in dict(self.relations).items():
            if not isinstance(rel, Relation):
                arity, tuples = rel
                rel = Relation(arity, frozenset(tuple(str(a) for a in t) for t in tuples))
            for t in rel.tuples:
                for a in t:
                    if a not in self.domain:
                        raise ModelError(f"relation {name}: element {a!r} not in domain")
            rels[name] = rel
        object.__setattr__(self, "relations", rels)
        consts = {k: str(v) for k, v in dict(self.constants).items()}
        for name, a in consts.items():
            if a not in self.domain:
                raise ModelError(f"constant {name}: element {a!r} not in domain")
        object.__setattr__(self, "constants", consts)

    def __hash__(self):
        return hash((self.domain, tuple(sorted((k, v.arity, v.tuples) for k, v in self.relations.items())),
                     tuple(sorted(self.constants.items()))))

    @property
    def size(self) -> int:
        return len(self.domain)

    def with_relation(self, name: str, arity: int, tuples: Iterable) -> "Structure":
        rels = dict(self.relations)
        rels[name] = (arity, tuples)
        return Structure(self.domain, rels, self.constants)

    def tuples(self, k: int) -> list:
        """All of ``domain^k`` in lexicographic domain order."""
        return list(itertools.product(self.domain, repeat=k))

    @classmethod
    def of_size(cls, n: int, relations: Mapping | None = None) -> "Structure":
        return cls(tuple(str(i) for i in range(n)), relations or {})

    def to_json(self) -> dict:
        return {
            "domain": list(self.domain),
            "relations": {
                name: {"arity": rel.arity, "tuples": [list(t) for t in sorted(rel.tuples)]}
                for name, rel in sorted(self.relations.items())
            },
            "constants": dict(sorted(self.constants.items())),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Structure":
        try:
            rels = {
                name: (int(rel["arity"]), [tuple(t) for t in rel.get("tuples", [])])
                for name, rel in data.get("relations", {}).items()
            }
            return cls(tuple(data["domain"]), rels, data.get("constants", {}))
        except (KeyError, TypeError) as exc:
            raise ModelError(f"bad structure data: {exc}") from exc


class Assignment(Mapping):
    """An immutable finite map from variable names to elements."""

    __slots__ = ("_items", "_hash")

    def __init__(self, bindings: Mapping | Iterable = ()):
        items = dict(bindings)
        self._items = tuple(sorted(items.items()))
        self._hash = hash(self._items)

    def __getitem__(self, var):
        for k, v in self._items:
            if k == var:
                return v
        raise KeyError(var)

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Assignment):
            return self._items == other._items
        return NotImplemented

    def __lt__(self, other):
        return self._items < other._items

    def __repr__(self):
        if not self._items:
            return "ε"
        return "{" + ", ".join(f"{k}↦{v}" for k, v in self._items) + "}"

    def restrict(self, variables: Iterable) -> "Assignment":
        keep = set(variables)
        return Assignment((k, v) for k, v in self._items if k in keep)

    def values_of(self, variables: Sequence) -> tuple:
        d = dict(self._items)
        return tuple(d[v] for v in variables)


EMPTY_ASSIGNMENT = Assignment()


def extend_assignment(s: Assignment, x: str, a: Element, structure: Structure | None = None) -> Assignment:
    """``s[a/x]``; an existing binding of ``x`` is overwritten."""
    if structure is not None and a not in structure.domain:
        raise ModelError(f"{a!r} is not in the domain")
    d = dict(s)
    d[x] = a
    return Assignment(d)


@dataclass(frozen=True)
class Team:
    vars: tuple
    rows: frozenset

    def __post_init__(self):
        vs = tuple(self.vars)
        if len(set(vs)) != len(vs):
            raise ModelError(f"duplicate variables in {vs}")
        if list(vs) != sorted(vs):
            order = sorted(range(len(vs)), key=lambda i: vs[i])
            object.__setattr__(self, "rows", frozenset(tuple(r[i] for i in order) for r in self.rows))
            vs = tuple(vs[i] for i in order)
        object.__setattr__(self, "vars", vs)
        rows = self.rows if isinstance(self.rows, frozenset) else frozenset(self.rows)
        for r in rows:
            if len(r) != len(vs):
                raise ModelError(f"row {r} does not bind exactly {vs}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def _make(cls, vars: tuple, rows: frozenset) -> "Team":
        # trusted fast path: vars already sorted and rows aligned
        t = object.__new__(cls)
        object.__setattr__(t, "vars", vars)
        object.__setattr__(t, "rows", rows)
        return t

    @classmethod
    def unit(cls) -> "Team":
        """The team ``{ε}``."""
        return cls._make((), frozenset({()}))

    @classmethod
    def empty(cls, vars: Iterable = ()) -> "Team":
        return cls(tuple(vars), frozenset())

    @classmethod
    def from_rows(cls, vars: Sequence, rows: Iterable) -> "Team":
        return cls(tuple(vars), frozenset(tuple(str(a) for a in r) for r in rows))

    @classmethod
    def from_assignments(cls, assignments: Iterable[Mapping], vars: Iterable | None = None) -> "Team":
        assignments = list(assignments)
        if vars is None:
            if not assignments:
                raise ModelError("cannot infer variables of an empty team")
            vars = sorted(assignments[0])
        vs = tuple(sorted(vars))
        rows = set()
        for s in assignments:
            if set(s) != set(vs):
                raise ModelError(f"assignment {dict(s)} does not bind exactly {vs}")
            rows.add(tuple(s[v] for v in vs))
        return cls._make(vs, frozenset(rows))

    def __len__(self):
        return len(self.rows)

    def __iter__(self) -> Iterator[Assignment]:
        return iter(self.assignments())

    def __le__(self, other: "Team") -> bool:
        return self.vars == other.vars and self.rows <= other.rows

    def sorted_rows(self) -> list:
        return sorted(self.rows)

    def assignments(self) -> list:
        return [Assignment(zip(self.vars, r)) for r in self.sorted_rows()]

    def index(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise ModelError(f"variable {var!r} not in team domain {self.vars}") from None

    def column(self, variables: Sequence) -> Callable:
        """Return a function mapping a row to its values on ``variables``."""
        idx = tuple(self.index(v) for v in variables)
        return lambda r: tuple(r[i] for i in idx)

    def subteam(self, rows: Iterable) -> "Team":
        return Team._make(self.vars, frozenset(rows))

    def subteams(self) -> Iterator["Team"]:
        rows = self.sorted_rows()
        for k in range(len(rows) + 1):
            for combo in itertools.combinations(rows, k):
                yield self.subteam(combo)

    def __repr__(self):
        if not self.rows:
            return f"Team(∅ over {list(self.vars)})"
        return "Team{" + ", ".join(repr(s) for s in self.assignments()) + "}"

    def to_json(self) -> dict:
        return {"vars": list(self.vars), "rows": [list(r) for r in self.sorted_rows()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Team":
        try:
            return cls.from_rows(data["vars"], [tuple(r) for r in data["rows"]])
        except (KeyError, TypeError) as exc:
            raise ModelError(f"bad team data: {exc}") from exc


@dataclass(frozen=True)
class SetWitness:
    """A function from the rows of one team to sets of ``arity``-tuples."""

    mapping: Mapping
    arity: int

    def __call__(self, s: Assignment) -> frozenset:
        return self.mapping[s]

    def __le__(self, other: "SetWitness") -> bool:
        return set(self.mapping) == set(other.mapping) and all(
            self.mapping[s] <= other.mapping[s] for s in self.mapping
        )

    def __repr__(self):
        parts = []
        for s in sorted(self.mapping):
            vals = sorted(self.mapping[s])
            shown = ", ".join(t[0] if self.arity == 1 else "⟨" + ",".join(t) + "⟩" for t in vals)
            parts.append(f"{s!r} ↦ {{{shown}}}")
        return "SetWitness(" + "; ".join(parts) + ")"


def _extension_layout(vars: tuple, new: Sequence) -> tuple:
    """Layout for writing values for ``new`` into rows over ``vars``.

    Returns the merged sorted variable tuple and, per merged position, either
    ``("old", i)`` or ``("new", j)``.
    """
    merged = tuple(sorted(set(vars) | set(new)))
    new_pos = {v: j for j, v in enumerate(new)}
    old_pos = {v: i for i, v in enumerate(vars)}
    layout = tuple(("new", new_pos[v]) if v in new_pos else ("old", old_pos[v]) for v in merged)
    return merged, layout


def extend_rows(X: Team, new: Sequence, values_for: Callable[[Row], Iterable]) -> Team:
    """``{s[ā/new] | s ∈ X, ā ∈ values_for(s)}`` on raw rows."""
    if len(set(new)) != len(new):
        raise ModelError(f"duplicate bound variables {tuple(new)}")
    merged, layout = _extension_layout(X.vars, new)
    out = set()
    for r in X.rows:
        for vals in values_for(r):
            out.add(tuple(vals[i] if kind == "new" else r[i] for kind, i in layout))
    return Team._make(merged, frozenset(out))


def extend_team_universal(X: Team, y: str | Sequence, M: Structure) -> Team:
    """``X[M/y]``; ``y`` may be one variable or a sequence (then ``X[M^k/ȳ]``)."""
    ys = (y,) if isinstance(y, str) else tuple(y)
    block = M.tuples(len(ys))
    return extend_rows(X, ys, lambda r: block)


def extend_team_function(X: Team, f: Callable[[Assignment], Element], y: str) -> Team:
    """``X[f/y]`` where ``f`` maps each assignment of ``X`` to an element."""
    vars_ = X.vars
    return extend_rows(X, (y,), lambda r: ((f(Assignment(zip(vars_, r))),),))


def extend_team_setwitness(X: Team, F: SetWitness | Mapping | Callable, xs: str | Sequence) -> Team:
    """``X[F/x̄]``: every row extended by every tuple in ``F(s)``."""
    xs = (xs,) if isinstance(xs, str) else tuple(xs)
    vars_ = X.vars
    get = F if callable(F) else F.__getitem__

    def values(r):
        out = get(Assignment(zip(vars_, r)))
        return [t if isinstance(t, tuple) else (t,) for t in out]

    return extend_rows(X, xs, values)


def restrict_team(X: Team, ys: Iterable) -> Team:
    """``X↾ȳ``; duplicate rows collapse."""
    ys = tuple(sorted(set(ys)))
    get = X.column(ys)
    return Team._make(ys, frozenset(get(r) for r in X.rows))


def possible_values(X: Team, s: Mapping, ys: Sequence) -> set:
    """``X^ȳ_s``: the ȳ-values of rows of ``X`` extending the partial assignment ``s``."""
    keys = tuple(s)
    match = X.column(keys)
    target = tuple(s[k] for k in keys)
    get = X.column(tuple(ys))
    return {get(r) for r in X.rows if match(r) == target}


def natural_join(X: Team, Y: Team) -> Team:
    """``X ⋈ Y``: assignments on ``vars(X) ∪ vars(Y)`` whose projections lie in both."""
    shared = tuple(v for v in X.vars if v in set(Y.vars))
    merged = tuple(sorted(set(X.vars) | set(Y.vars)))
    x_key = X.column(shared)
    y_key = Y.column(shared)
    buckets: dict = {}
    for r in Y.rows:
        buckets.setdefault(y_key(r), []).append(r)
    xi = {v: i for i, v in enumerate(X.vars)}
    yi = {v: i for i, v in enumerate(Y.vars)}
    out = set()
    for r in X.rows:
        for q in buckets.get(x_key(r), ()):
            out.add(tuple(r[xi[v]] if v in xi else q[yi[v]] for v in merged))
    return Team._make(merged, frozenset(out))


def team_to_relation(X: Team, order: Sequence) -> frozenset:
    """``X(x1,…,xk)`` for ``order`` a permutation of ``vars(X)``."""
    order = tuple(order)
    if sorted(order) != list(X.vars):
        raise ModelError(f"order {order} is not a permutation of {X.vars}")
    get = X.column(order)
    return frozenset(get(r) for r in X.rows)


def relation_to_team(R: Iterable, order: Sequence) -> Team:
    """``[R/x1,…,xk]``."""
    order = tuple(order)
    rows = []
    for t in R:
        t = tuple(t)
        if len(t) != len(order):
            raise ModelError(f"tuple {t} does not match variables {order}")
        rows.append(t)
    return Team(order, frozenset(rows))


def all_teams(variables: Sequence, domain: Sequence, max_rows: int | None = None) -> Iterator[Team]:
    """Every team over ``variables`` with values in ``domain`` (optionally bounded in size)."""
    vs = tuple(sorted(variables))
    universe = list(itertools.product(domain, repeat=len(vs)))
    top = len(universe) if max_rows is None else min(max_rows, len(universe))
    for k in range(top + 1):
        for combo in itertools.combinations(universe, k):
            yield Team._make(vs, frozenset(combo))


def load_json(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_structure(path: str | Path) -> Structure:
    return Structure.from_json(load_json(path))


def load_team(path: str | Path) -> Team:
    return Team.from_json(load_json(path))
