"""Polynomial runtime-complexity analysis for term rewrite systems."""

from .deppairs import (
    DpProblem,
    sharp,
    sharp_term,
    standard_dependency_pairs,
    usable_rule_list,
    usable_rules,
    weak_dependency_pairs,
    weak_innermost_dependency_pairs,
)
from .graphs import (
    CongruenceGraph,
    congruence_graph,
    dependency_edges,
    format_dot,
    maximal_source_paths,
    tcap,
)
from .interp import (
    LinearFunc,
    MatrixInterpretation,
    degree,
    evaluate,
    format_interpretation,
    interp_from_json,
    interp_to_json,
    linear_form,
    nonduplicating_slmi_gap,
    orients_strictly,
    orients_weakly,
    weight_gap_delta,
)
from .pipeline import (
    AnalysisOptions,
    Certificate,
    analyze,
    check_certificate,
    verdict_line,
)
from .replacement import (
    EMPTY_MAP,
    ReplacementMap,
    format_map,
    innermost_usable_map,
    make_map,
    needed_positions,
    nonreplacing_positions,
    replacing_positions,
    shielded_cap,
    usable_map,
)
from .rewriting import (
    DIVERGED,
    ClosureBudget,
    ClosureBudgetError,
    RelativeProblem,
    RelativeRewriter,
    Rewriter,
    basic_terms_up_to,
    derivation_height,
    ground_constructor_terms,
    runtime_complexity,
)
from .search import Budget, SearchOutcome, SearchProblem, search_interpretation
from .terms import (
    App,
    FreshVars,
    PositionError,
    Symbol,
    Term,
    Var,
    match,
    rename_apart,
    term_to_str,
    unify,
)
from .trs import TRS, Rule, TrsError, TrsSyntaxError, format_rule, parse_trs, print_trs

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
