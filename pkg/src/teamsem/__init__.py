"""Team semantics workbench: teams, generalized quantifiers, dependence atoms."""

from .core import (
    Assignment,
    ModelError,
    Relation,
    SetWitness,
    Structure,
    Team,
    extend_assignment,
    extend_team_function,
    extend_team_setwitness,
    extend_team_universal,
    natural_join,
    possible_values,
    relation_to_team,
    restrict_team,
    team_to_relation,
)
from .dependencies import (
    FD,
    MVD,
    IndepStatement,
    armstrong_derives,
    bfh_derives,
    join_decomposition_check,
    semantic_implies,
)
from .evaluator import (
    EvalConfig,
    EvaluationError,
    Evaluator,
    SearchLimitExceeded,
    SearchLimits,
    find_witness,
    satisfies,
    satisfies_tarski,
    semantic_value,
    sentence_truth,
)
from .quantifiers import (
    DEFAULT_REGISTRY,
    DownSet,
    LocalQuantifier,
    QuantifierRegistry,
    branch,
    branch_sher,
    hodges_lift,
    instantiate,
    is_maximal_product,
    is_monotone,
    product,
)
from .syntax import FormulaSyntaxError, free_variables, parse, to_text

__all__ = [
    "Assignment",
    "DEFAULT_REGISTRY",
    "DownSet",
    "EvalConfig",
    "EvaluationError",
    "Evaluator",
    "FD",
    "FormulaSyntaxError",
    "IndepStatement",
    "LocalQuantifier",
    "MVD",
    "ModelError",
    "QuantifierRegistry",
    "Relation",
    "SearchLimitExceeded",
    "SearchLimits",
    "SetWitness",
    "Structure",
    "Team",
    "armstrong_derives",
    "bfh_derives",
    "branch",
    "branch_sher",
    "extend_assignment",
    "extend_team_function",
    "extend_team_setwitness",
    "extend_team_universal",
    "find_witness",
    "free_variables",
    "hodges_lift",
    "instantiate",
    "is_maximal_product",
    "is_monotone",
    "join_decomposition_check",
    "natural_join",
    "parse",
    "possible_values",
    "product",
    "relation_to_team",
    "restrict_team",
    "satisfies",
    "satisfies_tarski",
    "semantic_implies",
    "semantic_value",
    "sentence_truth",
    "team_to_relation",
    "to_text",
]
__version__ = "0.1.0"
