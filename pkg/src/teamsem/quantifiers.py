"""Local generalized quantifiers over a finite domain and their algebra.

A local quantifier of arity k on a domain M is stored extensionally as the
set of relations ``A ⊆ M^k`` it accepts. The algebra (iteration, Barwise
branching, Sher branching, the Hodges lift) is computed by enumeration over
bitmasks: relation ``A ⊆ M^k`` is the integer whose bit ``i`` is set when the
``i``-th tuple of ``M^k`` (lexicographic in domain order) belongs to ``A``.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import Structure

# Full enumeration of P(M^k) is refused above this many tuples.
MAX_TUPLES = 16


class QuantifierError(ValueError):
    pass


class UnknownQuantifier(QuantifierError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class _Space:
    """Index of the tuples of ``domain^k``."""

    def __init__(self, domain: tuple, k: int):
        self.domain = domain
        self.k = k
        self.tuples = list(itertools.product(domain, repeat=k))
        self.index = {t: i for i, t in enumerate(self.tuples)}
        self.n = len(self.tuples)
        self.full = (1 << self.n) - 1

    def mask(self, rel: Iterable) -> int:
        m = 0
        for t in rel:
            t = tuple(t)
            try:
                m |= 1 << self.index[t]
            except KeyError:
                raise QuantifierError(f"tuple {t} is not in M^{self.k}") from None
        return m

    def rel(self, mask: int) -> frozenset:
        return frozenset(self.tuples[i] for i in range(self.n) if mask >> i & 1)

    def require_enumerable(self):
        if self.n > MAX_TUPLES:
            raise QuantifierError(
                f"|M|^{self.k} = {self.n} tuples: enumerating all relations is beyond {MAX_TUPLES} tuples"
            )


def _set_key(space: _Space, rel: frozenset):
    return (len(rel), sorted(space.index[t] for t in rel))


@dataclass(frozen=True)
class LocalQuantifier:
    name: str
    arity: int
    domain: tuple
    sets: tuple
    monotone: bool = field(init=False, compare=False)

    def __post_init__(self):
        if self.arity < 1:
            raise QuantifierError("quantifier arity must be positive")
        space = _Space(tuple(self.domain), self.arity)
        normalized = set()
        for s in self.sets:
            rel = frozenset(tuple(t) if not isinstance(t, str) else (t,) for t in s)
            space.mask(rel)  # validates membership in M^k
            normalized.add(rel)
        ordered = tuple(sorted(normalized, key=lambda r: _set_key(space, r)))
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "sets", ordered)
        object.__setattr__(self, "monotone", _upward_closed(space, {space.mask(r) for r in ordered}))

    @classmethod
    def from_masks(cls, name: str, arity: int, domain: tuple, masks: Iterable[int]) -> "LocalQuantifier":
        space = _Space(tuple(domain), arity)
        return cls(name, arity, tuple(domain), tuple(space.rel(m) for m in masks))

    @cached_property
    def space(self) -> _Space:
        return _Space(self.domain, self.arity)

    @cached_property
    def masks(self) -> tuple:
        return tuple(self.space.mask(s) for s in self.sets)

    @cached_property
    def mask_set(self) -> frozenset:
        return frozenset(self.masks)

    @property
    def domain_size(self) -> int:
        return len(self.domain)

    def __contains__(self, rel) -> bool:
        return self.space.mask(rel) in self.mask_set

    def __len__(self):
        return len(self.sets)

    def minimal_sets(self) -> tuple:
        """Members with no proper subset in the quantifier, in canonical order."""
        ms = self.masks
        keep = [m for m in ms if not any(o != m and o & ~m == 0 for o in ms)]
        keep = set(keep)
        return tuple(s for s, m in zip(self.sets, ms) if m in keep)

    def table(self) -> list:
        """Sets as sorted element lists (1-tuples flattened)."""
        out = []
        for s in self.sets:
            items = sorted(s, key=self.space.index.__getitem__)
            out.append([t[0] if self.arity == 1 else list(t) for t in items])
        return out


def _upward_closed(space: _Space, masks: set) -> bool:
    # single-element extensions suffice by induction on |B \ A|
    for m in masks:
        for i in range(space.n):
            if not m >> i & 1 and (m | 1 << i) not in masks:
                return False
    return True


def is_monotone(Q: LocalQuantifier) -> bool:
    """True iff ``Q`` is closed upwards in ``P(M^k)``."""
    return _upward_closed(Q.space, set(Q.masks))


# ---------------------------------------------------------------- built-ins

def _subsets_by_size(domain: tuple, accept: Callable[[int], bool]) -> list:
    return [
        frozenset((a,) for a in combo)
        for r in range(len(domain) + 1)
        if accept(r)
        for combo in itertools.combinations(domain, r)
    ]


def _exists(M: Structure) -> LocalQuantifier:
    return LocalQuantifier("exists", 1, M.domain, tuple(_subsets_by_size(M.domain, lambda r: r >= 1)))


def _forall(M: Structure) -> LocalQuantifier:
    return LocalQuantifier("forall", 1, M.domain, (frozenset((a,) for a in M.domain),))


def _most_dom(M: Structure) -> LocalQuantifier:
    n = M.size
    return LocalQuantifier("most_dom", 1, M.domain, tuple(_subsets_by_size(M.domain, lambda r: 2 * r > n)))


def _counting(name: str, n: int, exact: bool) -> Callable[[Structure], LocalQuantifier]:
    def build(M: Structure) -> LocalQuantifier:
        test = (lambda r: r == n) if exact else (lambda r: r >= n)
        return LocalQuantifier(name, 1, M.domain, tuple(_subsets_by_size(M.domain, test)))

    return build


# ---------------------------------------------------------------- algebra

def _same_domain(Q1: LocalQuantifier, Q2: LocalQuantifier):
    if Q1.domain != Q2.domain:
        raise QuantifierError(f"domain mismatch: {Q1.domain} vs {Q2.domain}")


def product(Q1: LocalQuantifier, Q2: LocalQuantifier, name: str | None = None) -> LocalQuantifier:
    """Iteration ``Q1Q2``: ``R`` is accepted iff ``{ā | R_ā ∈ Q2} ∈ Q1``."""
    _same_domain(Q1, Q2)
    k, l = Q1.arity, Q2.arity
    big = _Space(Q1.domain, k + l)
    big.require_enumerable()
    L = Q2.space.n
    fiber_mask = (1 << L) - 1
    inner, outer = Q2.mask_set, Q1.mask_set
    nk = Q1.space.n
    accepted = []
    for R in range(1 << big.n):
        heads = 0
        for a in range(nk):
            if (R >> (a * L)) & fiber_mask in inner:
                heads |= 1 << a
        if heads in outer:
            accepted.append(R)
    return LocalQuantifier.from_masks(name or f"prod({Q1.name},{Q2.name})", k + l, Q1.domain, accepted)


def _product_mask(A: int, B: int, nk: int, L: int) -> int:
    out = 0
    for a in range(nk):
        if A >> a & 1:
            out |= B << (a * L)
    return out


def branch(Q1: LocalQuantifier, Q2: LocalQuantifier, name: str | None = None) -> LocalQuantifier:
    """Barwise branching: ``R`` accepted iff some ``A×B ⊆ R`` with ``A ∈ Q1``, ``B ∈ Q2``."""
    _same_domain(Q1, Q2)
    for Q in (Q1, Q2):
        if not Q.monotone:
            raise QuantifierError(f"branching is defined for monotone quantifiers; {Q.name} is not monotone")
    k, l = Q1.arity, Q2.arity
    big = _Space(Q1.domain, k + l)
    big.require_enumerable()
    nk, L = Q1.space.n, Q2.space.n
    products = {
        _product_mask(A, B, nk, L)
        for A in (Q1.space.mask(s) for s in Q1.minimal_sets())
        for B in (Q2.space.mask(s) for s in Q2.minimal_sets())
    }
    accepted = [R for R in range(1 << big.n) if any(p & ~R == 0 for p in products)]
    return LocalQuantifier.from_masks(name or f"br({Q1.name},{Q2.name})", k + l, Q1.domain, accepted)


def _is_maximal(A: int, B: int, R: int, nk: int, L: int) -> bool:
    if _product_mask(A, B, nk, L) & ~R:
        return False
    for a in range(nk):
        if not A >> a & 1 and (B << (a * L)) & ~R == 0:
            return False
    rows = [a for a in range(nk) if A >> a & 1]
    for b in range(L):
        if not B >> b & 1 and all(R >> (a * L + b) & 1 for a in rows):
            return False
    return True


def is_maximal_product(A: Iterable, B: Iterable, R: Iterable, domain: Iterable, k: int = 1, l: int = 1) -> bool:
    """Whether ``A × B`` is a maximal cartesian product inside ``R``.

    ``A ⊆ M^k``, ``B ⊆ M^l``, ``R ⊆ M^(k+l)``; elements of ``A``/``B`` may be
    given bare when the arity is 1.
    """
    domain = tuple(domain)
    sk, sl, skl = _Space(domain, k), _Space(domain, l), _Space(domain, k + l)

    def norm(xs):
        return [x if isinstance(x, tuple) else (x,) for x in xs]

    return _is_maximal(sk.mask(norm(A)), sl.mask(norm(B)), skl.mask(norm(R)), sk.n, sl.n)


def branch_sher(Q1: LocalQuantifier, Q2: LocalQuantifier, name: str | None = None) -> LocalQuantifier:
    """Sher branching: ``R`` accepted iff some maximal ``A×B`` in ``R`` has ``A ∈ Q1``, ``B ∈ Q2``."""
    _same_domain(Q1, Q2)
    k, l = Q1.arity, Q2.arity
    big = _Space(Q1.domain, k + l)
    big.require_enumerable()
    nk, L = Q1.space.n, Q2.space.n
    pairs = [(A, B, _product_mask(A, B, nk, L)) for A in Q1.masks for B in Q2.masks]
    accepted = [
        R for R in range(1 << big.n)
        if any(p & ~R == 0 and _is_maximal(A, B, R, nk, L) for A, B, p in pairs)
    ]
    return LocalQuantifier.from_masks(name or f"brS({Q1.name},{Q2.name})", k + l, Q1.domain, accepted)


# ---------------------------------------------------------------- Hodges lift

@dataclass(frozen=True)
class DownSet:
    """A family of relations over ``domain^arity`` closed under subsets."""

    domain: tuple
    arity: int
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        fam = frozenset(frozenset(tuple(t) for t in r) for r in self.members)
        object.__setattr__(self, "members", fam)
        space = self.space
        for r in fam:
            space.mask(r)
            for t in r:
                if r - {t} not in fam:
                    raise QuantifierError("family is not closed downwards")

    @cached_property
    def space(self) -> _Space:
        return _Space(self.domain, self.arity)

    @cached_property
    def masks(self) -> frozenset:
        return frozenset(self.space.mask(r) for r in self.members)

    def __contains__(self, rel) -> bool:
        return frozenset(tuple(t) for t in rel) in self.members

    def __len__(self):
        return len(self.members)

    @classmethod
    def from_masks(cls, domain: tuple, arity: int, masks: Iterable[int]) -> "DownSet":
        space = _Space(tuple(domain), arity)
        obj = object.__new__(cls)
        object.__setattr__(obj, "domain", tuple(domain))
        object.__setattr__(obj, "arity", arity)
        object.__setattr__(obj, "members", frozenset(space.rel(m) for m in masks))
        return obj

    @classmethod
    def generated_by(cls, domain: Iterable, arity: int, relations: Iterable) -> "DownSet":
        """``↓{relations}``."""
        space = _Space(tuple(domain), arity)
        space.require_enumerable()
        flags = np.zeros(1 << space.n, dtype=bool)
        for r in relations:
            flags[space.mask(r)] = True
        closed = _down_close(flags, space.n)
        return cls.from_masks(space.domain, arity, np.flatnonzero(closed).tolist())


def _down_close(flags: np.ndarray, n: int) -> np.ndarray:
    # m is in the closure iff some member contains it
    out = flags.copy()
    for i in range(n):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 0, :] |= view[:, 1, :]
    return out


def all_down_sets(domain: Iterable, arity: int) -> list:
    """Every down set over ``domain^arity`` (one per antichain); small spaces only."""
    space = _Space(tuple(domain), arity)
    if space.n > 4:
        raise QuantifierError("enumerating all down sets is limited to at most 4 tuples")
    N = 1 << space.n
    out = []
    for fam in range(1 << N):
        members = [m for m in range(N) if fam >> m & 1]
        mset = set(members)
        if all((m & ~(1 << i)) in mset for m in members for i in range(space.n) if m >> i & 1):
            out.append(DownSet.from_masks(space.domain, arity, members))
    return out


def h_q(Q: LocalQuantifier, R: Iterable, n: int) -> frozenset:
    """``h_Q(R) = {ā ∈ M^n | R_ā ∈ Q}`` for ``R ⊆ M^(n+k)``."""
    src = _Space(Q.domain, n + Q.arity)
    dst = _Space(Q.domain, n)
    return dst.rel(_h_q_mask(Q, src.mask(R), dst.n))


def _h_q_mask(Q: LocalQuantifier, R: int, n_heads: int) -> int:
    L = Q.space.n
    fm = (1 << L) - 1
    accepted = Q.mask_set
    out = 0
    for a in range(n_heads):
        if (R >> (a * L)) & fm in accepted:
            out |= 1 << a
    return out


def hodges_lift(Q: LocalQuantifier, family: DownSet | Iterable) -> DownSet:
    """``ℒ(h_Q)(𝒳) = ↓{h_Q(X) | X ∈ 𝒳}``, a down set over ``M^n`` for 𝒳 over ``M^(n+k)``."""
    if not isinstance(family, DownSet):
        raise QuantifierError("the Hodges lift takes a down set")
    if family.domain != Q.domain:
        raise QuantifierError("domain mismatch between quantifier and down set")
    n = family.arity - Q.arity
    if n < 0:
        raise QuantifierError(f"down set of arity {family.arity} is too small for a type-{Q.arity} quantifier")
    dst = _Space(Q.domain, n)
    dst.require_enumerable()
    flags = np.zeros(1 << dst.n, dtype=bool)
    for X in family.masks:
        flags[_h_q_mask(Q, X, dst.n)] = True
    return DownSet.from_masks(Q.domain, n, np.flatnonzero(_down_close(flags, dst.n)).tolist())


# ---------------------------------------------------------------- registry

@dataclass(frozen=True)
class _Entry:
    arity: int | None
    monotone: bool | None  # as a global quantifier; None when it depends on the domain
    build: Callable[[Structure], LocalQuantifier]


_COUNT = re.compile(r"exists_(geq|eq)_(\d+)\Z")
_EXPR = re.compile(r"(br|brS|prod)\((.*)\)\Z")
_COMBINATORS = {"br": branch, "brS": branch_sher, "prod": product}


def _split_args(text: str) -> tuple:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return text[:i].strip(), text[i + 1:].strip()
    raise UnknownQuantifier(f"malformed quantifier expression ({text})")


class QuantifierRegistry:
    """Global quantifiers by name; ``instantiate`` yields the local quantifier on a structure.

    Besides registered names it resolves ``exists_geq_<n>``, ``exists_eq_<n>``
    and the combinators ``br(a,b)``, ``brS(a,b)``, ``prod(a,b)``.
    """

    def __init__(self):
        self._entries: dict = {}
        self._aliases: dict = {}
        self._cache: dict = {}
        self.register("exists", _exists, arity=1, monotone=True)
        self.register("forall", _forall, arity=1, monotone=True)
        self.register("most_dom", _most_dom, arity=1, monotone=True)

    def copy(self) -> "QuantifierRegistry":
        other = QuantifierRegistry()
        other._entries = dict(self._entries)
        other._aliases = dict(self._aliases)
        return other

    def register(self, name: str, build: Callable[[Structure], LocalQuantifier], arity: int | None = None,
                 monotone: bool | None = None):
        if name in self._entries or name in self._aliases:
            raise QuantifierError(f"quantifier {name!r} already registered")
        self._entries[name] = _Entry(arity, monotone, build)

    def register_sets(self, name: str, arity: int, domain: Iterable, sets: Iterable):
        """Register an explicit local quantifier, valid only on structures with this domain."""
        local = LocalQuantifier(name, arity, tuple(domain), tuple(sets))

        def build(M: Structure) -> LocalQuantifier:
            if set(M.domain) != set(local.domain):
                raise QuantifierError(f"quantifier {name!r} is defined over domain {list(local.domain)}")
            return LocalQuantifier(name, arity, M.domain, local.sets)

        self.register(name, build, arity=arity, monotone=local.monotone)

    def define(self, alias: str, expression: str):
        """Make ``alias`` stand for a registered name or combinator expression."""
        if alias in self._entries or alias in self._aliases:
            raise QuantifierError(f"quantifier {alias!r} already registered")
        self._entry(expression)
        self._aliases[alias] = expression

    def names(self) -> list:
        return sorted(self._entries) + sorted(self._aliases)

    def __contains__(self, name: str) -> bool:
        try:
            self._entry(name)
        except UnknownQuantifier:
            return False
        return True

    def _entry(self, name: str) -> _Entry:
        name = name.replace(" ", "")
        if name in self._aliases:
            return self._entry(self._aliases[name])
        if name in self._entries:
            return self._entries[name]
        m = _COUNT.match(name)
        if m:
            n = int(m.group(2))
            exact = m.group(1) == "eq"
            # globally, exists_eq_n is not monotone; exists_geq_n is
            return _Entry(1, not exact, _counting(name, n, exact))
        m = _EXPR.match(name)
        if m:
            op = _COMBINATORS[m.group(1)]
            a, b = _split_args(m.group(2))
            ea, eb = self._entry(a), self._entry(b)
            arity = ea.arity + eb.arity if ea.arity is not None and eb.arity is not None else None
            if m.group(1) == "br":
                mono = True
            elif m.group(1) == "prod" and ea.monotone and eb.monotone:
                mono = True
            else:
                mono = None

            def build(M: Structure, a=a, b=b, op=op, name=name) -> LocalQuantifier:
                return op(self.instantiate(a, M), self.instantiate(b, M), name=name)

            return _Entry(arity, mono, build)
        raise UnknownQuantifier(f"unknown quantifier {name!r}")

    def arity_hint(self, name: str) -> int | None:
        if name in ("exists", "forall"):
            return None  # these bind tuples of any length
        try:
            return self._entry(name).arity
        except UnknownQuantifier:
            return None

    def instantiate(self, name: str, M: Structure) -> LocalQuantifier:
        key = (name, M.domain)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._entry(name).build(M)
            self._cache[key] = hit
        return hit

    def is_monotone(self, name: str, M: Structure | None = None) -> bool:
        """Local monotonicity on ``M`` when given, else the global flag."""
        if M is not None:
            return self.instantiate(name, M).monotone
        mono = self._entry(name).monotone
        if mono is None:
            raise QuantifierError(f"monotonicity of {name!r} depends on the domain; supply a structure")
        return mono


DEFAULT_REGISTRY = QuantifierRegistry()


def instantiate(name: str, M: Structure, registry: QuantifierRegistry | None = None) -> LocalQuantifier:
    return (registry or DEFAULT_REGISTRY).instantiate(name, M)


def load_quantifier(data: Mapping, registry: QuantifierRegistry, structure: Structure):
    """Register a custom quantifier from its JSON form relative to ``structure``."""
    try:
        name, arity, sets = data["name"], int(data["arity"]), data["sets"]
    except (KeyError, TypeError, ValueError) as exc:
        raise QuantifierError(f"bad quantifier data: {exc}") from exc
    norm = [[tuple(t) if isinstance(t, list) else (t,) for t in s] for s in sets]
    registry.register_sets(name, arity, structure.domain, norm)
