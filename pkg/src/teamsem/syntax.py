"""Formulas of dependence/independence logics with generalized quantifiers.

Concrete syntax (ASCII)::

    formula := disj
    disj    := conj { "|" conj }
    conj    := unit { "&" unit }
    unit    := atom | "!" atom | quant | "(" formula ")"
    atom    := NAME "(" terms ")" | term "=" term | term "!=" term
             | "dep(" [terms] ";" terms ")" | "mvd(" [vars] ";" vars ")"
             | "ind(" [vars] ";" vars ";" vars ")"
    quant   := head vars [ "/" "(" [vars] ")" | "\\" "(" [vars] ")" ] formula
    head    := "exists" | "forall" | "Q[" qexpr "]"
    qexpr   := NAME | NAME "(" qexpr "," qexpr ")"

A quantifier body extends as far to the right as possible. Variables match
``[a-z][a-z0-9_]*``; constants are written ``#name``. ``ind(x̄ ; ȳ ; z̄)``
reads "ȳ is independent of z̄ given x̄". Formulas are kept in negation normal
form: ``!`` may only precede an atom.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass, field, replace

KEYWORDS = {"exists", "forall", "dep", "mvd", "ind"}
BUILTIN_HEADS = ("exists", "forall")
PLAIN, SLASHED, BACKSLASHED = "plain", "slashed", "backslashed"


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty variable name")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty constant name")

    def __str__(self):
        return "#" + self.name


Term = Var | Const


def _term_vars(terms) -> set:
    return {t.name for t in terms if isinstance(t, Var)}


# ---------------------------------------------------------------- formulas

class Formula:
    """Base class of the NNF abstract syntax."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)


@dataclass(frozen=True, repr=False)
class RelAtom(Formula):
    name: str
    terms: tuple
    negated: bool = False

    def __repr__(self):
        return f"RelAtom({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class Equality(Formula):
    left: Term
    right: Term
    negated: bool = False

    def __repr__(self):
        return f"Equality({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class FDepAtom(Formula):
    antecedent: tuple
    consequent: tuple
    negated: bool = False

    def __repr__(self):
        return f"FDepAtom({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class MVDAtom(Formula):
    lhs: tuple
    rhs: tuple
    negated: bool = False

    def __repr__(self):
        return f"MVDAtom({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class IndepAtom(Formula):
    """``ind(cond; left; right)``: left ⊥_cond right."""

    cond: tuple
    left: tuple
    right: tuple
    negated: bool = False

    def __repr__(self):
        return f"IndepAtom({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"And({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Or({to_text(self)!r})"


@dataclass(frozen=True, repr=False)
class Quant(Formula):
    """Quantifier node; ``quantifier`` is ``exists``, ``forall`` or a registry name.

    ``mode`` is ``plain``, ``slashed`` (witness blind to ``mode_vars``) or
    ``backslashed`` (witness sees only ``mode_vars``).
    """

    quantifier: str
    variables: tuple
    body: Formula
    mode: str = PLAIN
    mode_vars: tuple = field(default=())

    def __post_init__(self):
        if not self.variables:
            raise ValueError("quantifier binds no variables")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"repeated bound variable in {self.variables}")
        if self.mode not in (PLAIN, SLASHED, BACKSLASHED):
            raise ValueError(f"unknown quantifier mode {self.mode!r}")
        if self.mode == PLAIN and self.mode_vars:
            raise ValueError("plain quantifier with a slash list")
        clash = set(self.mode_vars) & set(self.variables)
        if clash:
            raise ValueError(f"slash list contains bound variable(s) {sorted(clash)}")

    def __repr__(self):
        return f"Quant({to_text(self)!r})"


ATOMS = (RelAtom, Equality, FDepAtom, MVDAtom, IndepAtom)


def is_atom(phi: Formula) -> bool:
    return isinstance(phi, ATOMS)


def negate_atom(phi: Formula) -> Formula:
    if not is_atom(phi):
        raise ValueError("only atoms can be negated in negation normal form")
    return replace(phi, negated=not phi.negated)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, (And, Or)):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, Quant):
        yield from subformulas(phi.body)


def quantifier_names(phi: Formula) -> set:
    return {p.quantifier for p in subformulas(phi) if isinstance(p, Quant)}


# ---------------------------------------------------------------- printing

def _terms(ts) -> str:
    return ",".join(str(t) for t in ts)


def _vars(vs) -> str:
    return ",".join(vs)


def _atom_text(phi) -> str:
    neg = "!" if phi.negated else ""
    if isinstance(phi, RelAtom):
        return f"{neg}{phi.name}({_terms(phi.terms)})"
    if isinstance(phi, Equality):
        op = "!=" if phi.negated else "="
        return f"{phi.left}{op}{phi.right}"
    if isinstance(phi, FDepAtom):
        return f"{neg}dep({_terms(phi.antecedent)};{_terms(phi.consequent)})"
    if isinstance(phi, MVDAtom):
        return f"{neg}mvd({_vars(phi.lhs)};{_vars(phi.rhs)})"
    return f"{neg}ind({_vars(phi.cond)};{_vars(phi.left)};{_vars(phi.right)})"


def _head(q: str) -> str:
    return q if q in BUILTIN_HEADS else f"Q[{q}]"


def to_text(phi: Formula) -> str:
    """Canonical text; ``parse(to_text(φ)) == φ``."""
    if is_atom(phi):
        return _atom_text(phi)
    if isinstance(phi, Quant):
        head = f"{_head(phi.quantifier)} {' '.join(phi.variables)}"
        if phi.mode == SLASHED:
            head += f"/({_vars(phi.mode_vars)})"
        elif phi.mode == BACKSLASHED:
            head += f"\\({_vars(phi.mode_vars)})"
        return f"{head} {to_text(phi.body)}"
    if isinstance(phi, And):
        return f"{_operand(phi.left, And, False)} & {_operand(phi.right, And, True)}"
    if isinstance(phi, Or):
        return f"{_operand(phi.left, Or, False)} | {_operand(phi.right, Or, True)}"
    raise TypeError(f"not a formula: {phi!r}")


def _operand(phi, parent, is_right) -> str:
    text = to_text(phi)
    if isinstance(phi, Quant):
        return f"({text})"
    if isinstance(phi, Or) and parent is And:
        return f"({text})"
    if is_right and type(phi) is parent:
        return f"({text})"
    return text


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<qhead>Q\[) |
        (?P<neq>!=) |
        (?P<punct>[()\[\],;&|!=/\\]) |
        (?P<const>\#[A-Za-z0-9_]+) |
        (?P<name>[A-Za-z][A-Za-z0-9_]*)
    )""",
    re.VERBOSE,
)
_VAR = re.compile(r"[a-z][a-z0-9_]*\Z")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        tok_text = m.group(kind)
        toks.append(_Tok(kind, tok_text, m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, registry=None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.registry = registry

    # token helpers
    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise FormulaSyntaxError(msg, tok.pos, self.text)

    def expect(self, text):
        tok = self.next()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def at(self, text) -> bool:
        return self.peek().text == text

    # grammar
    def parse(self) -> Formula:
        phi = self.formula()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return phi

    def formula(self) -> Formula:
        phi = self.conj()
        while self.at("|"):
            self.next()
            phi = Or(phi, self.conj())
        return phi

    def conj(self) -> Formula:
        phi = self.unit()
        while self.at("&"):
            self.next()
            phi = And(phi, self.unit())
        return phi

    def unit(self) -> Formula:
        tok = self.peek()
        if tok.text == "!":
            self.next()
            nxt = self.peek()
            if nxt.text == "(" or nxt.kind == "qhead" or nxt.text in BUILTIN_HEADS or nxt.text == "!":
                self.error("negation may only be applied to an atom (negation normal form)", nxt)
            return negate_atom(self.atom())
        if tok.text == "(":
            self.next()
            phi = self.formula()
            self.expect(")")
            return phi
        if tok.kind == "qhead" or tok.text in BUILTIN_HEADS:
            return self.quant()
        return self.atom()

    def quant(self) -> Formula:
        tok = self.next()
        if tok.kind == "qhead":
            name = self.qexpr()
            self.expect("]")
        else:
            name = tok.text
        variables = self.bound_vars()
        if not variables:
            self.error("quantifier needs at least one bound variable")
        mode, mode_vars = PLAIN, ()
        if self.at("/") or self.at("\\"):
            mode = SLASHED if self.next().text == "/" else BACKSLASHED
            self.expect("(")
            mode_vars = self.varlist(")")
            self.expect(")")
        if self.registry is not None:
            if name not in BUILTIN_HEADS and name not in self.registry:
                self.error(f"unknown quantifier {name!r}", tok)
            arity = self.registry.arity_hint(name)
            if arity is not None and arity != len(variables):
                self.error(f"quantifier {name} has arity {arity} but binds {len(variables)} variable(s)", tok)
        body = self.formula()
        try:
            return Quant(name, tuple(variables), body, mode, tuple(mode_vars))
        except ValueError as exc:
            self.error(str(exc), tok)

    def qexpr(self) -> str:
        tok = self.next()
        if tok.kind != "name":
            self.error("expected a quantifier name", tok)
        if self.at("("):
            self.next()
            a = self.qexpr()
            self.expect(",")
            b = self.qexpr()
            self.expect(")")
            return f"{tok.text}({a},{b})"
        return tok.text

    def is_var_token(self, tok) -> bool:
        return tok.kind == "name" and tok.text not in KEYWORDS and bool(_VAR.match(tok.text))

    def bound_vars(self) -> list:
        out = []
        while self.is_var_token(self.peek()):
            tok, follow = self.peek(), self.peek(1)
            if follow.text in ("=", "!="):
                break
            # "r(x)" is an atom; "x y (…)" ends the list before a parenthesized body
            if follow.text == "(" and follow.pos == tok.pos + len(tok.text):
                break
            out.append(self.next().text)
            if self.at(",") and self.is_var_token(self.peek(1)):
                self.next()
        return out

    def varlist(self, stop: str) -> list:
        out = []
        if self.at(stop):
            return out
        while True:
            tok = self.next()
            if not self.is_var_token(tok):
                self.error("expected a variable", tok)
            out.append(tok.text)
            if not self.at(","):
                return out
            self.next()

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "const":
            return Const(tok.text[1:])
        if self.is_var_token(tok):
            return Var(tok.text)
        self.error("expected a term", tok)

    def termlist(self, stop: str) -> list:
        out = []
        if self.at(stop):
            return out
        while True:
            out.append(self.term())
            if not self.at(","):
                return out
            self.next()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "name" and self.peek(1).text == "(":
            name = tok.text
            self.next()
            self.next()
            if name == "dep":
                ante = self.termlist(";")
                self.expect(";")
                cons = self.termlist(")")
                if not cons:
                    self.error("dependence atom needs a consequent")
                self.expect(")")
                return FDepAtom(tuple(ante), tuple(cons))
            if name == "mvd":
                lhs = self.varlist(";")
                self.expect(";")
                rhs = self.varlist(")")
                self.expect(")")
                return MVDAtom(tuple(lhs), tuple(rhs))
            if name == "ind":
                cond = self.varlist(";")
                self.expect(";")
                left = self.varlist(";")
                self.expect(";")
                right = self.varlist(")")
                self.expect(")")
                return IndepAtom(tuple(cond), tuple(left), tuple(right))
            if name in KEYWORDS:
                self.error(f"{name!r} is reserved", tok)
            terms = self.termlist(")")
            self.expect(")")
            return RelAtom(name, tuple(terms))
        if tok.kind in ("name", "const"):
            left = self.term()
            op = self.next()
            if op.text not in ("=", "!="):
                self.error("expected '=' or '!='", op)
            right = self.term()
            return Equality(left, right, op.text == "!=")
        self.error(f"expected an atom, found {tok.text or 'end of input'!r}", tok)


def parse(text: str, registry=None) -> Formula:
    """Parse ``text`` into an NNF formula.

    When ``registry`` is given, quantifier names must resolve in it and those
    with a known arity are checked against the number of bound variables.
    """
    return _Parser(text, registry).parse()


# ---------------------------------------------------------------- analyses

def free_variables(phi: Formula) -> frozenset:
    if isinstance(phi, RelAtom):
        return frozenset(_term_vars(phi.terms))
    if isinstance(phi, Equality):
        return frozenset(_term_vars((phi.left, phi.right)))
    if isinstance(phi, FDepAtom):
        return frozenset(_term_vars(phi.antecedent) | _term_vars(phi.consequent))
    if isinstance(phi, MVDAtom):
        return frozenset(phi.lhs) | frozenset(phi.rhs)
    if isinstance(phi, IndepAtom):
        return frozenset(phi.cond) | frozenset(phi.left) | frozenset(phi.right)
    if isinstance(phi, (And, Or)):
        return free_variables(phi.left) | free_variables(phi.right)
    if isinstance(phi, Quant):
        return (free_variables(phi.body) - frozenset(phi.variables)) | frozenset(phi.mode_vars)
    raise TypeError(f"not a formula: {phi!r}")


def is_downward_closed_fragment(phi: Formula, monotone_of) -> bool:
    """Sufficient syntactic test for closure under subteams.

    ``monotone_of(name)`` reports whether the named quantifier is monotone; it
    should raise for unknown names.
    """
    for sub in subformulas(phi):
        if isinstance(sub, (MVDAtom, IndepAtom)):
            return False
        if isinstance(sub, Quant) and sub.quantifier not in BUILTIN_HEADS and not monotone_of(sub.quantifier):
            return False
    return True


def is_lq_formula(phi: Formula) -> bool:
    """No dependence atoms and no slashed or backslashed quantifiers."""
    for sub in subformulas(phi):
        if isinstance(sub, (FDepAtom, MVDAtom, IndepAtom)):
            return False
        if isinstance(sub, Quant) and sub.mode != PLAIN:
            return False
    return True


def _is_guarded_fdep(phi: Formula) -> bool:
    return (
        isinstance(phi, Quant)
        and phi.quantifier == "exists"
        and phi.mode == PLAIN
        and len(phi.variables) == 1
        and isinstance(phi.body, And)
        and isinstance(phi.body.left, FDepAtom)
        and not phi.body.left.negated
        and phi.body.left.consequent == (Var(phi.variables[0]),)
        and all(isinstance(t, Var) for t in phi.body.left.antecedent)
    )


def is_normal(phi: Formula) -> bool:
    """Dependence atoms occur only in the shape ``∃y (dep(x̄;y) ∧ ψ)``."""
    if isinstance(phi, FDepAtom):
        return False
    if is_atom(phi):
        return True
    if isinstance(phi, (And, Or)):
        return is_normal(phi.left) and is_normal(phi.right)
    if _is_guarded_fdep(phi):
        return is_normal(phi.body.right)
    return is_normal(phi.body)


def replace_fdep_with_mvd(phi: Formula) -> Formula:
    """Swap every guarded ``dep(x̄;y)`` for ``mvd(x̄;y)`` in a normal formula."""
    if not is_normal(phi):
        raise ValueError("formula is not normal")
    return _fdep_to_mvd(phi)


def _fdep_to_mvd(phi):
    if is_atom(phi):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(_fdep_to_mvd(phi.left), _fdep_to_mvd(phi.right))
    if _is_guarded_fdep(phi):
        dep = phi.body.left
        mvd = MVDAtom(tuple(t.name for t in dep.antecedent), phi.variables)
        return replace(phi, body=And(mvd, _fdep_to_mvd(phi.body.right)))
    return replace(phi, body=_fdep_to_mvd(phi.body))


def backslash_to_fdep(phi: Formula) -> Formula:
    """Rewrite each ``exists x̄\\(ȳ) ψ`` as ``exists x̄ (dep(ȳ;x̄) & ψ)``.

    Backslashed universal and generalized quantifiers are left alone: for the
    universal quantifier the two forms are not equivalent.
    """
    if is_atom(phi):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(backslash_to_fdep(phi.left), backslash_to_fdep(phi.right))
    body = backslash_to_fdep(phi.body)
    if phi.quantifier == "exists" and phi.mode == BACKSLASHED:
        dep = FDepAtom(tuple(Var(v) for v in phi.mode_vars), tuple(Var(v) for v in phi.variables))
        return Quant("exists", phi.variables, And(dep, body))
    return replace(phi, body=body)


def backslash_to_mvd(phi: Formula) -> Formula:
    """Rewrite each backslashed ``Q y\\(x̄) ψ`` (one bound variable) as ``Q y (mvd(x̄;y) & ψ)``."""
    if is_atom(phi):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(backslash_to_mvd(phi.left), backslash_to_mvd(phi.right))
    body = backslash_to_mvd(phi.body)
    if phi.mode == BACKSLASHED:
        if len(phi.variables) != 1:
            raise ValueError("mvd replacement needs a single bound variable")
        return Quant(phi.quantifier, phi.variables, And(MVDAtom(phi.mode_vars, phi.variables), body))
    return replace(phi, body=body)
