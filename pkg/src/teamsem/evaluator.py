"""Team satisfaction ``M, X ⊨ φ`` by exhaustive witness search.

Every quantifier is decided by enumerating its witnesses:

* ``forall x̄``: the team ``X[M^k/x̄]``;
* ``exists x̄`` (strict): functions ``f: X → M^k``; (lax) ``F: X → ∃_M``;
* a monotone ``Q[q] x̄``: ``F: X → Q_M``;
* a non-monotone ``Q[q] x̄``: ``F: X → P(M^k)`` subject to the largeness
  condition (every ``F′ ≥ F`` that still satisfies the body maps into ``Q_M``).

Slashed and backslashed nodes restrict witnesses to functions factoring through
``X↾(dom(X)∖ȳ)`` and ``X↾ȳ`` respectively; largeness is still tested against
all ``F′``.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np

from ._lattice import superset_any
from .core import Assignment, SetWitness, Structure, Team, all_teams, _extension_layout
from .dependencies import indep_holds, mvd_holds
from .quantifiers import DEFAULT_REGISTRY, LocalQuantifier, QuantifierRegistry
from .syntax import (
    PLAIN,
    SLASHED,
    And,
    Const,
    Equality,
    FDepAtom,
    Formula,
    IndepAtom,
    MVDAtom,
    Or,
    Quant,
    RelAtom,
    Var,
    free_variables,
    is_downward_closed_fragment,
    is_lq_formula,
    to_text,
)

STRICT, LAX = "strict", "lax"
CORRECTED, LITERAL = "corrected", "literal"


class EvaluationError(ValueError):
    pass


class SearchLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchLimits:
    max_rows: int = 256
    max_domain: int = 8
    max_candidates: int = 1 << 20

    @classmethod
    def from_env(cls, base: "SearchLimits | None" = None, var: str = "TEAMSEM_LIMITS") -> "SearchLimits":
        """Override fields from ``TEAMSEM_LIMITS="max_rows=64,max_candidates=100000"``."""
        base = base or cls()
        text = os.environ.get(var, "").strip()
        if not text:
            return base
        updates = {}
        for part in text.split(","):
            if not part.strip():
                continue
            key, _, value = part.partition("=")
            key = key.strip().replace("-", "_")
            if key not in ("max_rows", "max_domain", "max_candidates"):
                raise ValueError(f"{var}: unknown limit {key!r}")
            updates[key] = int(value)
        return replace(base, **updates)


@dataclass(frozen=True)
class EvalConfig:
    existential_mode: str = STRICT
    nonmonotone_largeness: str = CORRECTED
    limits: SearchLimits = field(default_factory=SearchLimits)
    # restrict monotone witnesses to minimal sets when the body is closed under subteams
    minimal_witnesses: bool = True
    # decide monotone quantifiers through the largeness condition as well
    force_largeness: bool = False

    def __post_init__(self):
        if self.existential_mode not in (STRICT, LAX):
            raise ValueError(f"existential_mode must be strict or lax, not {self.existential_mode!r}")
        if self.nonmonotone_largeness not in (CORRECTED, LITERAL):
            raise ValueError(f"nonmonotone_largeness must be corrected or literal, not {self.nonmonotone_largeness!r}")


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class SemanticValue:
    vars: tuple
    teams: tuple

    def __contains__(self, X: Team) -> bool:
        return X in set(self.teams)

    def __len__(self):
        return len(self.teams)


class Evaluator:
    """Satisfaction on one structure, memoized per ``(formula, team)``."""

    def __init__(self, structure: Structure, registry: QuantifierRegistry | None = None,
                 config: EvalConfig | None = None):
        self.M = structure
        self.registry = registry or DEFAULT_REGISTRY
        self.cfg = config or DEFAULT_CONFIG
        if structure.size > self.cfg.limits.max_domain:
            raise SearchLimitExceeded(f"domain size {structure.size} exceeds max_domain={self.cfg.limits.max_domain}")
        self._cache: dict = {}
        self._dc_cache: dict = {}
        self._exists_k: dict = {}

    # ------------------------------------------------------------ public
    def satisfies(self, X: Team, phi: Formula) -> bool:
        missing = free_variables(phi) - set(X.vars)
        if missing:
            raise EvaluationError(f"free variable(s) {sorted(missing)} not in the team domain {list(X.vars)}")
        self._check_team_values(X)
        return self._sat(X, phi)

    def witness(self, X: Team, phi: Formula) -> SetWitness | None:
        if not isinstance(phi, Quant):
            raise EvaluationError("witness search needs a quantifier at the top of the formula")
        missing = free_variables(phi) - set(X.vars)
        if missing:
            raise EvaluationError(f"free variable(s) {sorted(missing)} not in the team domain {list(X.vars)}")
        self._check_team_values(X)
        found = self._quant(X, phi)
        if found is None:
            return None
        mapping = {Assignment(zip(X.vars, r)): frozenset(found[r]) for r in X.rows}
        return SetWitness(mapping, len(phi.variables))

    def downward_closed(self, phi: Formula) -> bool:
        hit = self._dc_cache.get(phi)
        if hit is None:
            hit = is_downward_closed_fragment(phi, lambda q: self.registry.is_monotone(q, self.M))
            self._dc_cache[phi] = hit
        return hit

    # ------------------------------------------------------------ helpers
    def _check_team_values(self, X: Team):
        dom = set(self.M.domain)
        for r in X.rows:
            for a in r:
                if a not in dom:
                    raise EvaluationError(f"team value {a!r} is not in the domain")

    def _term_getter(self, X: Team, t):
        if isinstance(t, Var):
            i = X.index(t.name)
            return lambda r: r[i]
        if isinstance(t, Const):
            try:
                a = self.M.constants[t.name]
            except KeyError:
                raise EvaluationError(f"unknown constant #{t.name}") from None
            return lambda r: a
        raise TypeError(f"not a term: {t!r}")

    def _terms_getter(self, X: Team, ts):
        gs = [self._term_getter(X, t) for t in ts]
        return lambda r: tuple(g(r) for g in gs)

    def _extensions(self, X: Team, variables: tuple, rows: list, choices: list):
        """Per row and per choice, the extended rows ``s[ā/x̄]`` for ``ā`` in the choice."""
        merged, layout = _extension_layout(X.vars, variables)
        table = [
            [frozenset(tuple(t[i] if kind == "new" else r[i] for kind, i in layout) for t in c) for c in choices]
            for r in rows
        ]
        return merged, table

    def _assemble(self, merged: tuple, parts) -> Team:
        out = frozenset().union(*parts)
        if len(out) > self.cfg.limits.max_rows:
            raise SearchLimitExceeded(f"team of {len(out)} rows exceeds max_rows={self.cfg.limits.max_rows}")
        return Team._make(merged, out)

    def _budget(self, count: int, what: str):
        if count > self.cfg.limits.max_candidates:
            raise SearchLimitExceeded(f"{what}: {count} candidates exceed max_candidates={self.cfg.limits.max_candidates}")

    # ------------------------------------------------------------ recursion
    def _sat(self, X: Team, phi: Formula) -> bool:
        key = (phi, X)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = self._sat_uncached(X, phi)
        self._cache[key] = result
        return result

    def _sat_uncached(self, X: Team, phi: Formula) -> bool:
        if isinstance(phi, RelAtom):
            rel = self.M.relations.get(phi.name)
            if rel is None:
                raise EvaluationError(f"unknown relation {phi.name!r}")
            if rel.arity != len(phi.terms):
                raise EvaluationError(f"relation {phi.name} has arity {rel.arity}, used with {len(phi.terms)}")
            get = self._terms_getter(X, phi.terms)
            tuples = rel.tuples
            if phi.negated:
                return all(get(r) not in tuples for r in X.rows)
            return all(get(r) in tuples for r in X.rows)
        if isinstance(phi, Equality):
            a, b = self._term_getter(X, phi.left), self._term_getter(X, phi.right)
            return all((a(r) == b(r)) != phi.negated for r in X.rows)
        if isinstance(phi, FDepAtom):
            if phi.negated:
                return not X.rows
            key = self._terms_getter(X, phi.antecedent)
            val = self._terms_getter(X, phi.consequent)
            seen: dict = {}
            for r in X.rows:
                if seen.setdefault(key(r), val(r)) != val(r):
                    return False
            return True
        if isinstance(phi, MVDAtom):
            if phi.negated:
                return not X.rows
            return mvd_holds(X, phi.lhs, phi.rhs)
        if isinstance(phi, IndepAtom):
            if phi.negated:
                return not X.rows
            return indep_holds(X, phi.cond, phi.left, phi.right)
        if isinstance(phi, And):
            return self._sat(X, phi.left) and self._sat(X, phi.right)
        if isinstance(phi, Or):
            return self._disjunction(X, phi)
        if isinstance(phi, Quant):
            return self._quant(X, phi) is not None
        raise TypeError(f"not a formula: {phi!r}")

    # ------------------------------------------------------------ disjunction
    def _disjunction(self, X: Team, phi: Or) -> bool:
        """``∃ Y ∪ Z = X`` with ``Y ⊨ left`` and ``Z ⊨ right`` (overlap allowed)."""
        rows = X.sorted_rows()
        n = len(rows)
        self._budget(1 << n, "disjunction split")

        def sub(mask):
            return X.subteam(rows[i] for i in range(n) if mask >> i & 1)

        full = (1 << n) - 1
        left, right = phi.left, phi.right
        if self.downward_closed(right):
            # a larger Z only makes the right side harder: take Z = X∖Y
            return any(self._sat(sub(y), left) and self._sat(sub(full ^ y), right) for y in range(full, -1, -1))
        if self.downward_closed(left):
            return any(self._sat(sub(z), right) and self._sat(sub(full ^ z), left) for z in range(full, -1, -1))
        ok_left = np.array([self._sat(sub(m), left) for m in range(full + 1)], dtype=bool)
        ok_right = np.array([self._sat(sub(m), right) for m in range(full + 1)], dtype=bool)
        covers = superset_any(ok_right, n)
        return bool(any(ok_left[y] and covers[full ^ y] for y in range(full + 1)))

    # ------------------------------------------------------------ quantifiers
    def _classes(self, X: Team, q: Quant, rows: list):
        """Row → class index for the information the witness may see."""
        missing = set(q.mode_vars) - set(X.vars)
        if missing:
            kind = "slash" if q.mode == SLASHED else "backslash"
            raise EvaluationError(f"{kind} variable(s) {sorted(missing)} not in the team domain {list(X.vars)}")
        if q.mode == PLAIN:
            return list(range(len(rows))), len(rows)
        if q.mode == SLASHED:
            visible = tuple(v for v in X.vars if v not in set(q.mode_vars))
        else:
            visible = tuple(q.mode_vars)
        key = X.column(visible)
        keys = sorted({key(r) for r in rows})
        pos = {k: i for i, k in enumerate(keys)}
        return [pos[key(r)] for r in rows], len(keys)

    def _exists_quantifier(self, k: int) -> LocalQuantifier:
        hit = self._exists_k.get(k)
        if hit is None:
            if k == 1:
                hit = self.registry.instantiate("exists", self.M)
            else:
                tuples = self.M.tuples(k)
                sets = [frozenset(c) for r in range(1, len(tuples) + 1) for c in itertools.combinations(tuples, r)]
                hit = LocalQuantifier("exists", k, self.M.domain, tuple(sets))
            self._exists_k[k] = hit
        return hit

    def _quant(self, X: Team, q: Quant):
        """Return a witness ``{row: set of tuples}`` or ``None``."""
        k = len(q.variables)
        rows = X.sorted_rows()
        cls, ncls = self._classes(X, q, rows)
        name = q.quantifier
        if name == "forall":
            block = self.M.tuples(k)
            merged, table = self._extensions(X, q.variables, rows, [block])
            team = self._assemble(merged, [t[0] for t in table])
            return {r: block for r in rows} if self._sat(team, q.body) else None
        if name == "exists" and self.cfg.existential_mode == STRICT:
            singletons = [(t,) for t in self.M.tuples(k)]
            return self._search(X, q, rows, cls, ncls, singletons)
        if name == "exists":
            Q = self._exists_quantifier(k)
        else:
            Q = self.registry.instantiate(name, self.M)
            if Q.arity != k:
                raise EvaluationError(f"quantifier {name} has arity {Q.arity} but binds {k} variable(s)")
        if (Q.monotone and not self.cfg.force_largeness) or self.cfg.nonmonotone_largeness == LITERAL:
            if Q.monotone and self.cfg.minimal_witnesses and self.downward_closed(q.body):
                choices = Q.minimal_sets()
            else:
                choices = Q.sets
            return self._search(X, q, rows, cls, ncls, [tuple(sorted(s)) for s in choices])
        return self._largeness(X, q, rows, cls, ncls, Q)

    def _search(self, X, q, rows, cls, ncls, choices):
        """First ``G: classes → choices`` with ``X[G∘cls/x̄] ⊨ body``."""
        self._budget(len(choices) ** ncls, f"witnesses for {to_text(q)[:40]}")
        merged, table = self._extensions(X, q.variables, rows, choices)
        members = [[i for i, c in enumerate(cls) if c == j] for j in range(ncls)]
        for pick in itertools.product(range(len(choices)), repeat=ncls):
            team = self._assemble(merged, [table[i][p] for j, p in enumerate(pick) for i in members[j]])
            if self._sat(team, q.body):
                return {r: choices[pick[c]] for r, c in zip(rows, cls)}
        return None

    def _largeness(self, X, q, rows, cls, ncls, Q: LocalQuantifier):
        space = Q.space
        N = space.n
        n = len(rows)
        nbits = n * N
        self._budget(1 << nbits, f"largeness search for {to_text(q)[:40]}")
        fm = (1 << N) - 1
        rel_of = [space.rel(m) for m in range(1 << N)]
        accepted = Q.mask_set

        merged, table = self._extensions(X, q.variables, rows, rel_of)

        def team_for(F):
            return self._assemble(merged, [table[i][(F >> (i * N)) & fm] for i in range(n)])

        sat = np.zeros(1 << nbits, dtype=bool)
        in_q = np.zeros(1 << nbits, dtype=bool)
        for F in range(1 << nbits):
            sat[F] = self._sat(team_for(F), q.body)
            in_q[F] = all(((F >> (i * N)) & fm) in accepted for i in range(n))
        # F is spoiled when some F' ≥ F satisfies the body but leaves Q somewhere
        spoiled = superset_any(sat & ~in_q, nbits)
        for pick in itertools.product(range(1 << N), repeat=ncls):
            F = 0
            for i, c in enumerate(cls):
                F |= pick[c] << (i * N)
            if sat[F] and not spoiled[F]:
                return {r: rel_of[pick[c]] for r, c in zip(rows, cls)}
        return None


# ---------------------------------------------------------------- module API

def satisfies(M: Structure, X: Team, phi: Formula, cfg: EvalConfig | None = None,
              registry: QuantifierRegistry | None = None) -> bool:
    return Evaluator(M, registry, cfg).satisfies(X, phi)


def sentence_truth(M: Structure, sigma: Formula, cfg: EvalConfig | None = None,
                   registry: QuantifierRegistry | None = None) -> bool:
    """``M ⊨ σ`` iff ``M, {ε} ⊨ σ``."""
    fv = free_variables(sigma)
    if fv:
        raise EvaluationError(f"not a sentence: free variable(s) {sorted(fv)}")
    return Evaluator(M, registry, cfg).satisfies(Team.unit(), sigma)


def find_witness(M: Structure, X: Team, phi: Formula, cfg: EvalConfig | None = None,
                 registry: QuantifierRegistry | None = None) -> SetWitness | None:
    return Evaluator(M, registry, cfg).witness(X, phi)


def semantic_value(M: Structure, phi: Formula, cfg: EvalConfig | None = None,
                   registry: QuantifierRegistry | None = None) -> SemanticValue:
    """All teams over ``FV(φ)`` that satisfy ``φ``, in enumeration order."""
    ev = Evaluator(M, registry, cfg)
    fv = tuple(sorted(free_variables(phi)))
    npoints = M.size ** len(fv)
    if npoints >= 63:
        raise SearchLimitExceeded(f"{npoints} possible rows: too many teams to enumerate")
    ev._budget(1 << npoints, "semantic value")
    teams = tuple(X for X in all_teams(fv, M.domain) if ev.satisfies(X, phi))
    return SemanticValue(fv, teams)


def satisfies_tarski(M: Structure, s: Mapping, phi: Formula, registry: QuantifierRegistry | None = None) -> bool:
    """Classical satisfaction of an L(Q) formula at one assignment."""
    if not is_lq_formula(phi):
        raise EvaluationError("Tarskian evaluation covers formulas without dependence atoms or slashes")
    missing = free_variables(phi) - set(s)
    if missing:
        raise EvaluationError(f"free variable(s) {sorted(missing)} unassigned")
    return _tarski(M, dict(s), phi, registry or DEFAULT_REGISTRY)


def _value(M: Structure, s: dict, t) -> str:
    if isinstance(t, Var):
        return s[t.name]
    try:
        return M.constants[t.name]
    except KeyError:
        raise EvaluationError(f"unknown constant #{t.name}") from None


def _tarski(M: Structure, s: dict, phi: Formula, registry: QuantifierRegistry) -> bool:
    if isinstance(phi, RelAtom):
        rel = M.relations.get(phi.name)
        if rel is None:
            raise EvaluationError(f"unknown relation {phi.name!r}")
        return (tuple(_value(M, s, t) for t in phi.terms) in rel.tuples) != phi.negated
    if isinstance(phi, Equality):
        return (_value(M, s, phi.left) == _value(M, s, phi.right)) != phi.negated
    if isinstance(phi, And):
        return _tarski(M, s, phi.left, registry) and _tarski(M, s, phi.right, registry)
    if isinstance(phi, Or):
        return _tarski(M, s, phi.left, registry) or _tarski(M, s, phi.right, registry)
    if isinstance(phi, Quant):
        k = len(phi.variables)
        extension = []
        for t in M.tuples(k):
            s2 = dict(s)
            s2.update(zip(phi.variables, t))
            if _tarski(M, s2, phi.body, registry):
                extension.append(t)
        if phi.quantifier == "exists":
            return bool(extension)
        if phi.quantifier == "forall":
            return len(extension) == M.size ** k
        Q = registry.instantiate(phi.quantifier, M)
        if Q.arity != k:
            raise EvaluationError(f"quantifier {phi.quantifier} has arity {Q.arity} but binds {k} variable(s)")
        return frozenset(extension) in set(Q.sets)
    raise EvaluationError(f"not an L(Q) formula: {to_text(phi)}")
