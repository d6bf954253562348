from __future__ import annotations

import itertools

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import oracle
from teamsem import (
    EvalConfig,
    EvaluationError,
    Evaluator,
    SearchLimitExceeded,
    SearchLimits,
    Structure,
    Team,
    find_witness,
    satisfies,
    satisfies_tarski,
    semantic_value,
    sentence_truth,
)
from teamsem.core import Assignment, all_teams, extend_team_setwitness
from teamsem.judgments import BRANCHING_R, branching_structure, builtin_registry
from teamsem.quantifiers import DEFAULT_REGISTRY
from teamsem.syntax import backslash_to_mvd, parse

LAX = EvalConfig(existential_mode="lax")
R_SAMPLES = (
    frozenset(),
    frozenset({("0", "1")}),
    frozenset({("0", "0"), ("1", "1")}),
    frozenset({("0", "0"), ("0", "1"), ("1", "0")}),
)


def to_oracle(X: Team):
    return frozenset(frozenset(zip(X.vars, r)) for r in X.rows)


def sample_structure(R, P=(("1",),)):
    return Structure.of_size(2, {"R": (2, R), "P": (1, P)})


# ---------------------------------------------------------------- examples

def test_signaling():
    for n in (2, 3):
        M = Structure.of_size(n)
        assert not sentence_truth(M, parse("forall x exists y/(x) x=y"))
        assert sentence_truth(M, parse("forall x exists z exists y/(x) x=y"))


def test_full_team_defeats_dep_and_its_negation():
    M = Structure.of_size(2)
    full = Team.from_rows(("x", "y"), itertools.product("01", repeat=2))
    assert not satisfies(M, full, parse("dep(x;y)"))
    assert not satisfies(M, full, parse("!dep(x;y)"))
    assert not sentence_truth(M, parse("forall x y (dep(x;y) | !dep(x;y))"))
    assert sentence_truth(Structure.of_size(1), parse("forall x y (dep(x;y) | !dep(x;y))"))


@pytest.mark.parametrize("text", ["!dep(;x)", "R(x,x) & !R(x,x)", "mvd(x;x)", "!ind(;x;x)", "Q[exists_eq_1] y/(x) R(x,y)"])
def test_empty_team_satisfies_everything(text):
    assert satisfies(branching_structure(), Team.empty(("x",)), parse(text))


def test_unit_team_is_not_empty():
    assert not sentence_truth(Structure.of_size(2), parse("exists x !dep(;x)"))
    assert sentence_truth(Structure.of_size(2), parse("exists x dep(;x)"))


def test_three_element_relation_linear_versus_branching():
    reg = builtin_registry()
    M = branching_structure()
    ev = Evaluator(M, reg)
    assert not ev.satisfies(Team.unit(), parse("Q[exists_eq_1] x exists y/(x) R(x,y)", reg))
    assert ev.satisfies(Team.unit(), parse("exists y Q[exists_eq_1] x/(y) R(x,y)", reg))
    assert ev.satisfies(Team.unit(), parse("Q[brS_e1_e] x y R(x,y)", reg))
    assert M.relations["R"].tuples == BRANCHING_R


def test_atom_impossibility_on_split_relation():
    from teamsem.judgments import SPLIT_S

    X = Team.from_rows(("x", "y"), SPLIT_S)
    M = Structure.of_size(3)
    assert satisfies(M, X, parse("mvd(x;y)"))
    assert not satisfies(M, Team.from_rows(("x", "y"), [("0", "0"), ("1", "1")]), parse("mvd(;x)"))


def test_literals_are_checked_per_row():
    M = sample_structure(R_SAMPLES[3])
    X = Team.from_rows(("x", "y"), [("0", "0"), ("1", "0")])
    assert satisfies(M, X, parse("R(x,y)"))
    assert not satisfies(M, X, parse("!R(x,y)"))
    assert satisfies(M, X, parse("!R(x,y) | R(x,y)"))
    assert satisfies(M, X.subteam([("1", "0")]), parse("x!=y"))


def test_constants():
    M = Structure(("0", "1"), {"P": (1, [("1",)])}, {"c": "1"})
    assert sentence_truth(M, parse("P(#c)"))
    assert sentence_truth(M, parse("exists x (x=#c & dep(;x))"))
    with pytest.raises(EvaluationError):
        sentence_truth(M, parse("P(#d)"))


def test_tarski_examples():
    M = sample_structure(R_SAMPLES[3])
    assert satisfies_tarski(M, {}, parse("forall x exists y R(x,y)"))
    assert not satisfies_tarski(M, {}, parse("forall x R(x,x)"))
    assert satisfies_tarski(M, {"x": "0"}, parse("forall y R(x,y)"))
    assert not satisfies_tarski(M, {"x": "1"}, parse("forall y R(x,y)"))
    assert satisfies_tarski(M, {"x": "1"}, parse("Q[exists_eq_1] y R(x,y)"))
    assert not satisfies_tarski(M, {}, parse("Q[most_dom] x R(x,x)"))
    with pytest.raises(EvaluationError):
        satisfies_tarski(M, {}, parse("exists x dep(;x)"))
    with pytest.raises(EvaluationError):
        satisfies_tarski(M, {}, parse("R(x,x)"))


# ---------------------------------------------------------------- errors and limits

def test_unbound_free_variable():
    with pytest.raises(EvaluationError):
        satisfies(Structure.of_size(2), Team.from_rows(("x",), [("0",)]), parse("x=y"))
    with pytest.raises(EvaluationError):
        sentence_truth(Structure.of_size(2), parse("exists x x=y"))


def test_slash_variable_must_be_in_domain():
    with pytest.raises(EvaluationError):
        sentence_truth(Structure.of_size(2), parse("exists x/(y) x=x"))
    with pytest.raises(EvaluationError):
        sentence_truth(Structure.of_size(2), parse(r"exists x\(y) x=x"))


def test_team_values_outside_domain():
    with pytest.raises(EvaluationError):
        satisfies(Structure.of_size(2), Team.from_rows(("x",), [("5",)]), parse("x=x"))


def test_quantifier_arity_mismatch():
    with pytest.raises(EvaluationError):
        sentence_truth(Structure.of_size(2), parse("Q[most_dom] x y x=y"))


def test_resource_limits():
    tiny = EvalConfig(limits=SearchLimits(max_candidates=10))
    M = Structure.of_size(3)
    with pytest.raises(SearchLimitExceeded):
        satisfies(M, Team.from_rows(("x",), [("0",), ("1",), ("2",)]), parse("exists y dep(;y)"), tiny)
    with pytest.raises(SearchLimitExceeded):
        Evaluator(Structure.of_size(9))
    with pytest.raises(SearchLimitExceeded):
        sentence_truth(M, parse("forall x y z w x=x"), EvalConfig(limits=SearchLimits(max_rows=20)))
    with pytest.raises(SearchLimitExceeded):
        semantic_value(Structure.of_size(4), parse("x=y & y=z"))


def test_limits_from_environment(monkeypatch):
    monkeypatch.setenv("TEAMSEM_LIMITS", "max_rows=64, max-candidates=1000")
    lim = SearchLimits.from_env()
    assert (lim.max_rows, lim.max_candidates, lim.max_domain) == (64, 1000, 8)
    monkeypatch.setenv("TEAMSEM_LIMITS", "max_time=3")
    with pytest.raises(ValueError):
        SearchLimits.from_env()
    monkeypatch.delenv("TEAMSEM_LIMITS")
    assert SearchLimits.from_env() == SearchLimits()


def test_config_validation():
    with pytest.raises(ValueError):
        EvalConfig(existential_mode="loose")
    with pytest.raises(ValueError):
        EvalConfig(nonmonotone_largeness="sometimes")


# ---------------------------------------------------------------- semantic values and witnesses

def test_semantic_value_of_constancy():
    val = semantic_value(Structure.of_size(2), parse("dep(;x)"))
    assert val.vars == ("x",)
    assert set(val.teams) == {Team.empty(("x",)), Team.from_rows(("x",), [("0",)]), Team.from_rows(("x",), [("1",)])}
    assert Team.from_rows(("x",), [("0",), ("1",)]) not in val


def test_semantic_value_of_sentence():
    val = semantic_value(Structure.of_size(2), parse("exists x dep(;x)"))
    assert val.vars == () and set(val.teams) == {Team.empty(), Team.unit()}
    val = semantic_value(Structure.of_size(2), parse("exists x !dep(;x)"))
    assert set(val.teams) == {Team.empty()}


def test_semantic_value_is_down_closed_for_dependence_logic():
    M = sample_structure(R_SAMPLES[3])
    val = semantic_value(M, parse("exists z (dep(x;z) & R(z,y))"))
    members = set(val.teams)
    for X in members:
        for r in X.rows:
            assert X.subteam(X.rows - {r}) in members


def test_witness_satisfies_the_body():
    M = sample_structure(R_SAMPLES[3])
    X = Team.from_rows(("x",), [("0",), ("1",)])
    phi = parse("exists y (R(x,y) & dep(x;y))")
    F = find_witness(M, X, phi)
    assert F is not None and F.arity == 1
    assert all(len(F(s)) == 1 for s in X)
    assert satisfies(M, extend_team_setwitness(X, F, "y"), phi.body)
    assert find_witness(M, X, parse("exists y (x!=y & dep(;y))")) is None
    again = find_witness(M, X, phi)
    assert again.mapping == F.mapping


def test_witness_for_slashed_quantifier_respects_classes():
    M = Structure.of_size(2)
    X = Team.from_rows(("x", "z"), [("0", "0"), ("1", "0")])
    F = find_witness(M, X, parse("exists y/(x) y=z"))
    assert F(Assignment({"x": "0", "z": "0"})) == F(Assignment({"x": "1", "z": "0"}))
    with pytest.raises(EvaluationError):
        find_witness(M, X, parse("x=z"))


def test_witness_under_largeness():
    M = Structure.of_size(2, {"P": (1, [("0",)])})
    F = find_witness(M, Team.unit(), parse("Q[exists_eq_1] x P(x)"))
    assert F(Assignment({})) == frozenset({("0",)})


# ---------------------------------------------------------------- quantifier behaviour

def test_exists_modes_agree_on_downward_closed_bodies():
    bodies = ["R(x,y)", "dep(x;y) & R(x,y)", "dep(;y) | x=y", "!dep(x;y)", "P(y) | R(y,x)"]
    for R in R_SAMPLES:
        M = sample_structure(R)
        strict, lax = Evaluator(M), Evaluator(M, config=LAX)
        for b in bodies:
            phi = parse(f"exists y ({b})")
            for X in all_teams(("x",), "01"):
                assert strict.satisfies(X, phi) == lax.satisfies(X, phi), (b, X)


OFF_FRAGMENT = [
    ("exists y (ind(;x;y) & dep(y;x))", ("x",)),
    ("exists y (ind(;x;y) & (x=y | x!=y))", ("x",)),
    ("exists y forall w (ind(;y;w) | dep(w;y))", ()),
    ("exists y (mvd(x;y) & ind(z;x;y))", ("x", "z")),
    ("exists y (Q[exists_eq_1] v/(y) v=x | y!=z)", ("x", "z")),
]


def test_strict_and_lax_observations_off_the_fragment():
    """Recorded agreement on a fixed corpus; no general law is claimed."""
    M = Structure.of_size(2)
    strict, lax = Evaluator(M), Evaluator(M, config=LAX)
    observed = 0
    for text, variables in OFF_FRAGMENT:
        phi = parse(text)
        assert not strict.downward_closed(phi)
        for X in all_teams(variables, "01"):
            assert strict.satisfies(X, phi) == lax.satisfies(X, phi), (text, X)
            observed += 1
    assert observed == 4 + 4 + 2 + 16 + 16


def test_lax_exists_matches_exists_geq_1():
    M = sample_structure(R_SAMPLES[2])
    lax = Evaluator(M, config=LAX)
    for b in ["!dep(x;y)", "ind(;x;y)", "mvd(;y) & R(x,y)", "!dep(;y) | x=y"]:
        for X in all_teams(("x",), "01"):
            assert lax.satisfies(X, parse(f"exists y ({b})")) == lax.satisfies(X, parse(f"Q[exists_geq_1] y ({b})"))


def test_forall_requires_all_of_the_domain():
    # the universal quantifier of the team logic reads off full fibers
    M = Structure.of_size(2)
    assert not sentence_truth(M, parse("forall x dep(;x)"))
    assert sentence_truth(Structure.of_size(1), parse("forall x dep(;x)"))
    assert sentence_truth(M, parse("Q[forall] x !dep(;x)")) == sentence_truth(M, parse("forall x !dep(;x)"))


def test_literal_and_corrected_largeness():
    M = Structure.of_size(2, {"P": (1, [("0",), ("1",)])})
    phi = parse("Q[exists_eq_1] x P(x)")
    assert not sentence_truth(M, phi)
    assert sentence_truth(M, phi, EvalConfig(nonmonotone_largeness="literal"))
    M1 = Structure.of_size(2, {"P": (1, [("1",)])})
    assert sentence_truth(M1, phi) and sentence_truth(M1, phi, EvalConfig(nonmonotone_largeness="literal"))


def test_minimal_witnesses_do_not_change_verdicts():
    full = EvalConfig(minimal_witnesses=False)
    bodies = ["R(x,y)", "dep(x;y) & P(y)", "!R(x,y) | dep(;y)", "forall z (R(y,z) | y=z)"]
    for R in R_SAMPLES:
        M = sample_structure(R)
        a, b = Evaluator(M), Evaluator(M, config=full)
        for q in ("most_dom", "exists_geq_2", "forall", "exists_geq_1"):
            for head in (f"Q[{q}] y", f"Q[{q}] y/(x)"):
                for body in bodies:
                    phi = parse(f"{head} ({body})")
                    for X in all_teams(("x",), "01"):
                        assert a.satisfies(X, phi) == b.satisfies(X, phi)


def test_sher_direction_fails_for_two_exactly_one_quantifiers():
    """Slashed largeness inspects every extension of the witness, not only the product.

    On R = {00, 01, 10} the linear prefix picks A = {1}, B = {0}, and the
    product {1}×{0} is maximal inside R, yet any larger witness for the inner
    quantifier breaks uniqueness, so the branching reading fails.
    """
    reg = DEFAULT_REGISTRY
    M = Structure.of_size(2, {"R": (2, [("0", "0"), ("0", "1"), ("1", "0")])})
    lin = parse("Q[exists_eq_1] x Q[exists_eq_1] y/(x) R(x,y)", reg)
    br = parse("Q[brS(exists_eq_1,exists_eq_1)] x y R(x,y)", reg)
    assert sentence_truth(M, lin, registry=reg)
    assert not sentence_truth(M, br, registry=reg)
    rels = {"R": {("0", "0"), ("0", "1"), ("1", "0")}}
    assert oracle.sat("01", rels, oracle.team([{}]), lin)
    assert not sentence_truth(M, parse("Q[exists_eq_1] x exists y/(x) R(x,y)"))


def test_backslash_to_mvd_preserves_truth():
    reg = DEFAULT_REGISTRY
    for R in R_SAMPLES:
        M = sample_structure(R)
        for q in ("most_dom", "exists_geq_1", "forall"):
            phi = parse(rf"forall x Q[{q}] y\(x) (R(x,y) | P(y))", reg)
            assert sentence_truth(M, phi) == sentence_truth(M, backslash_to_mvd(phi))


# ---------------------------------------------------------------- cross-checks

@pytest.mark.parametrize("R", R_SAMPLES, ids=lambda r: str(sorted(r)))
def test_team_and_tarski_semantics_agree_on_plain_formulas(R):
    M = sample_structure(R)
    formulas = [
        "forall x exists y R(x,y)",
        "Q[most_dom] x (P(x) | R(x,x))",
        "Q[exists_eq_1] x Q[exists_geq_1] y R(x,y)",
        "forall x (Q[exists_eq_1] y R(x,y) | x=x)",
        "Q[exists_eq_1] x (P(x) & forall y (R(x,y) | !R(x,y)))",
        "exists x (!P(x) & Q[exists_eq_2] y !R(x,y))",
    ]
    ev = Evaluator(M)
    for text in formulas:
        phi = parse(text)
        assert ev.satisfies(Team.unit(), phi) == satisfies_tarski(M, {}, phi), text


def test_team_semantics_is_flat_on_plain_formulas():
    M = sample_structure(R_SAMPLES[3])
    ev = Evaluator(M)
    phi = parse("Q[exists_eq_1] y (R(x,y) & x!=y)")
    for X in all_teams(("x",), "01"):
        expected = all(satisfies_tarski(M, {"x": r[0]}, phi) for r in X.rows)
        assert ev.satisfies(X, phi) == expected


ATOMS = ["P(x)", "!P(y)", "R(x,y)", "R(y,z)", "x=z", "y!=z", "dep(x;y)", "dep(;z)", "!dep(y;x)",
         "mvd(x;y)", "ind(;x;y)", "ind(z;x;y)"]
QUANTS = ["exists", "forall", "Q[most_dom]", "Q[exists_eq_1]", "Q[exists_geq_2]"]
VARS = ["x", "y", "z"]


@st.composite
def formula_text(draw, depth=2):
    kind = draw(st.sampled_from(["atom", "and", "or", "quant", "quant"] if depth else ["atom"]))
    if kind == "atom":
        return draw(st.sampled_from(ATOMS))
    if kind in ("and", "or"):
        op = " & " if kind == "and" else " | "
        return "(" + draw(formula_text(depth - 1)) + op + draw(formula_text(depth - 1)) + ")"
    v = draw(st.sampled_from(VARS))
    others = [w for w in VARS if w != v]
    mode = draw(st.sampled_from(["", "slash", "backslash"]))
    suffix = ""
    if mode:
        mv = draw(st.lists(st.sampled_from(others), max_size=2, unique=True))
        suffix = ("/(" if mode == "slash" else "\\(") + ",".join(mv) + ")"
    head = draw(st.sampled_from(QUANTS))
    return f"{head} {v}{suffix} ({draw(formula_text(depth - 1))})"


TEAM_ROWS = list(itertools.product("01", repeat=3))


@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(formula_text(), st.sets(st.sampled_from(TEAM_ROWS), min_size=1, max_size=2), st.sampled_from(R_SAMPLES))
def test_evaluator_matches_reference_semantics(text, rows, R):
    phi = parse(text)
    M = sample_structure(R)
    X = Team.from_rows(("x", "y", "z"), rows)
    rels = {"R": set(R), "P": {("1",)}}
    expected = oracle.sat("01", rels, to_oracle(X), phi)
    assert satisfies(M, X, phi) == expected


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(formula_text(depth=1), st.sets(st.sampled_from(TEAM_ROWS), min_size=1, max_size=2), st.sampled_from(R_SAMPLES))
def test_literal_largeness_matches_reference(text, rows, R):
    phi = parse(text)
    M = sample_structure(R)
    X = Team.from_rows(("x", "y", "z"), rows)
    rels = {"R": set(R), "P": {("1",)}}
    expected = oracle.sat("01", rels, to_oracle(X), phi, largeness="literal")
    assert satisfies(M, X, phi, EvalConfig(nonmonotone_largeness="literal")) == expected
