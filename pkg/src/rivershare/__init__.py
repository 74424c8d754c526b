"""Exact-arithmetic water-rights allocation on river networks."""

from .axioms import (
    AxiomId,
    CharacterizationResult,
    CheckReport,
    CheckStatus,
    ProblemSampler,
    SuiteReport,
    Witness,
    characterize_geometric,
    check_downstream_impartiality,
    check_equal_sources,
    check_neutrality,
    check_pii,
    check_scale_invariance,
    check_upstream_invariance,
    run_axiom_suite,
    search_counterexamples,
)
from .core import (
    Allocation,
    Problem,
    Quantity,
    RiverNetwork,
    RiverShareError,
    downstream_path,
    line_problem,
    quantity,
    source_of,
    upstream_closure,
    validate_allocation,
    validate_network,
)
from .data import BasinDataset, emit_problem, emit_table, nile_dataset, parse_problem
from .rationalize import (
    FitResult,
    RationalizationResult,
    fit_gamma,
    rationalize_alpha,
    scale_withdrawals,
)
from .rules import (
    AdditiveDelta,
    Beta,
    BlackBoxRule,
    FullTransfer,
    Geometric,
    Lambda,
    MultiGeometric,
    NoTransfer,
    RuleSpec,
    Serial,
    additive_delta,
    allocate,
    beta_alpha_vector,
    beta_delta_vector,
    evaluate,
    geometric_closed_form,
    geometric_recursive,
    lambda_rule,
    recover_alpha,
    serial,
)

__all__ = [
    "AdditiveDelta",
    "Allocation",
    "AxiomId",
    "BasinDataset",
    "Beta",
    "BlackBoxRule",
    "CharacterizationResult",
    "CheckReport",
    "CheckStatus",
    "FitResult",
    "FullTransfer",
    "Geometric",
    "Lambda",
    "MultiGeometric",
    "NoTransfer",
    "Problem",
    "ProblemSampler",
    "Quantity",
    "RationalizationResult",
    "RiverNetwork",
    "RiverShareError",
    "RuleSpec",
    "Serial",
    "SuiteReport",
    "Witness",
    "additive_delta",
    "allocate",
    "beta_alpha_vector",
    "beta_delta_vector",
    "characterize_geometric",
    "check_downstream_impartiality",
    "check_equal_sources",
    "check_neutrality",
    "check_pii",
    "check_scale_invariance",
    "check_upstream_invariance",
    "downstream_path",
    "emit_problem",
    "emit_table",
    "evaluate",
    "fit_gamma",
    "geometric_closed_form",
    "geometric_recursive",
    "lambda_rule",
    "line_problem",
    "nile_dataset",
    "parse_problem",
    "quantity",
    "rationalize_alpha",
    "recover_alpha",
    "run_axiom_suite",
    "scale_withdrawals",
    "search_counterexamples",
    "serial",
    "source_of",
    "upstream_closure",
    "validate_allocation",
    "validate_network",
]
