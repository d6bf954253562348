"""Naive reference semantics used as a test oracle.

Written directly from the truth conditions with no pruning, caching or bit
tricks, and without importing the evaluator.  Teams are frozensets of
frozensets of ``(var, value)`` pairs; quantifiers are predicates on
``(set_of_tuples, domain)``.
"""

from __future__ import annotations

import itertools

from teamsem.syntax import (
    BACKSLASHED,
    SLASHED,
    And,
    Const,
    Equality,
    FDepAtom,
    IndepAtom,
    MVDAtom,
    Or,
    Quant,
    RelAtom,
)

QUANTIFIERS = {
    "exists": lambda A, M: len(A) >= 1,
    "forall": lambda A, M: len(A) == len(M),
    "most_dom": lambda A, M: 2 * len(A) > len(M),
    "exists_eq_1": lambda A, M: len(A) == 1,
    "exists_eq_2": lambda A, M: len(A) == 2,
    "exists_geq_2": lambda A, M: len(A) >= 2,
    "exists_geq_3": lambda A, M: len(A) >= 3,
}


def team(rows):
    return frozenset(frozenset(r.items()) for r in rows)


def powerset(xs):
    xs = list(xs)
    return [frozenset(c) for r in range(len(xs) + 1) for c in itertools.combinations(xs, r)]


def _val(s, t, consts):
    if isinstance(t, Const):
        return consts[t.name]
    return dict(s)[t.name]


def _restrict(s, vs):
    return frozenset((k, v) for k, v in s if k in vs)


def _extend(s, xs, t):
    d = dict(s)
    d.update(zip(xs, t))
    return frozenset(d.items())


def local(name, M, k=1):
    """Local quantifier as a list of sets of k-tuples."""
    if k == 1:
        pred = QUANTIFIERS[name]
        return [frozenset((a,) for a in A) for A in powerset(M) if pred(A, M)]
    tuples = list(itertools.product(M, repeat=k))
    if name == "exists":
        return [A for A in powerset(tuples) if A]
    if name == "forall":
        return [frozenset(tuples)]
    raise KeyError(name)


def is_monotone(sets, M, k):
    space = set(itertools.product(M, repeat=k))
    ss = set(sets)
    return all(A | {t} in ss for A in ss for t in space)


def sat(M, rels, X, phi, consts=None, largeness="corrected", quantifiers=None):
    consts = consts or {}
    quantifiers = quantifiers or {}
    return _sat(tuple(M), rels, X, phi, consts, largeness, quantifiers)


def _sat(M, rels, X, phi, consts, largeness, qs):
    rec = lambda Y, f: _sat(M, rels, Y, f, consts, largeness, qs)  # noqa: E731
    if isinstance(phi, RelAtom):
        return all((tuple(_val(s, t, consts) for t in phi.terms) in rels[phi.name]) != phi.negated for s in X)
    if isinstance(phi, Equality):
        return all((_val(s, phi.left, consts) == _val(s, phi.right, consts)) != phi.negated for s in X)
    if isinstance(phi, FDepAtom):
        if phi.negated:
            return len(X) == 0
        return all(
            [_val(s, t, consts) for t in phi.consequent] == [_val(u, t, consts) for t in phi.consequent]
            for s in X for u in X
            if [_val(s, t, consts) for t in phi.antecedent] == [_val(u, t, consts) for t in phi.antecedent]
        )
    if isinstance(phi, MVDAtom):
        if phi.negated:
            return len(X) == 0
        return mvd_by_possible_values(X, phi.lhs, phi.rhs)
    if isinstance(phi, IndepAtom):
        if phi.negated:
            return len(X) == 0
        return indep_fo(X, phi.cond, phi.left, phi.right)
    if isinstance(phi, And):
        return rec(X, phi.left) and rec(X, phi.right)
    if isinstance(phi, Or):
        rows = list(X)
        for labels in itertools.product((0, 1, 2), repeat=len(rows)):
            Y = frozenset(r for r, l in zip(rows, labels) if l in (0, 2))
            Z = frozenset(r for r, l in zip(rows, labels) if l in (1, 2))
            if rec(Y, phi.left) and rec(Z, phi.right):
                return True
        return False
    if isinstance(phi, Quant):
        return _quant(M, X, phi, rec, largeness, qs)
    raise TypeError(phi)


def _classes(X, q):
    dom = set(k for s in X for k, _ in s) if X else set()
    if q.mode == SLASHED:
        assert set(q.mode_vars) <= dom or not X
        return lambda s: _restrict(s, dom - set(q.mode_vars))
    if q.mode == BACKSLASHED:
        return lambda s: _restrict(s, set(q.mode_vars))
    return lambda s: s


def _quant(M, X, q, rec, largeness, qs):
    k = len(q.variables)
    xs = q.variables
    space = list(itertools.product(M, repeat=k))
    if q.quantifier == "forall":
        return rec(frozenset(_extend(s, xs, t) for s in X for t in space), q.body)
    if q.quantifier == "exists":
        allowed = [frozenset([t]) for t in space]
        monotone = True
        accept = None
    else:
        sets = qs[q.quantifier](M) if q.quantifier in qs else local(q.quantifier, M, k)
        monotone = is_monotone(sets, M, k)
        accept = set(sets)
        allowed = sets if (monotone or largeness == "literal") else powerset(space)
    key = _classes(X, q)
    rows = sorted(X, key=sorted)
    keys = sorted({key(s) for s in rows}, key=sorted)

    def build(F):
        return frozenset(_extend(s, xs, t) for s in rows for t in F[s])

    all_fs = None
    for pick in itertools.product(allowed, repeat=len(keys)):
        choice = dict(zip(keys, pick))
        F = {s: choice[key(s)] for s in rows}
        if not rec(build(F), q.body):
            continue
        if accept is None or monotone or largeness == "literal":
            return True
        # largeness: every F' >= F satisfying the body maps into Q
        if all_fs is None:
            all_fs = [dict(zip(rows, p)) for p in itertools.product(powerset(space), repeat=len(rows))]
        if all(
            all(G[s] in accept for s in rows)
            for G in all_fs
            if all(F[s] <= G[s] for s in rows) and rec(build(G), q.body)
        ):
            return True
    return False


def mvd_by_possible_values(X, lhs, rhs):
    """``X^ȳ_{s↾x̄} = X^ȳ_{s↾x̄z̄}`` for every s, with z̄ the remaining columns."""
    dom = set(k for s in X for k, _ in s)
    xs, ys = set(lhs), set(rhs)
    zs = dom - xs - ys

    def pv(s, vs):
        return {_restrict(u, ys) for u in X if _restrict(u, vs) == _restrict(s, vs)}

    return all(pv(s, xs) == pv(s, xs | zs) for s in X)


def indep_fo(X, cond, left, right):
    """``∀s,s' (s(x̄)=s'(x̄) → ∃s0 (s0(x̄ȳ)=s(x̄ȳ) ∧ s0(z̄)=s'(z̄)))``."""
    xs, ys, zs = set(cond), set(left), set(right)
    for s in X:
        for t in X:
            if _restrict(s, xs) != _restrict(t, xs):
                continue
            if not any(_restrict(u, xs | ys) == _restrict(s, xs | ys) and _restrict(u, zs) == _restrict(t, zs) for u in X):
                return False
    return True


def tarski(M, rels, s, phi, consts=None):
    """Classical satisfaction at one assignment (a dict)."""
    consts = consts or {}
    M = tuple(M)
    if isinstance(phi, RelAtom):
        return (tuple(s[t.name] if not isinstance(t, Const) else consts[t.name] for t in phi.terms) in rels[phi.name]) != phi.negated
    if isinstance(phi, Equality):
        get = lambda t: consts[t.name] if isinstance(t, Const) else s[t.name]  # noqa: E731
        return (get(phi.left) == get(phi.right)) != phi.negated
    if isinstance(phi, And):
        return tarski(M, rels, s, phi.left, consts) and tarski(M, rels, s, phi.right, consts)
    if isinstance(phi, Or):
        return tarski(M, rels, s, phi.left, consts) or tarski(M, rels, s, phi.right, consts)
    if isinstance(phi, Quant):
        ext = frozenset(
            t for t in itertools.product(M, repeat=len(phi.variables))
            if tarski(M, rels, {**s, **dict(zip(phi.variables, t))}, phi.body, consts)
        )
        return ext in set(local(phi.quantifier, M, len(phi.variables)))
    raise TypeError(phi)
