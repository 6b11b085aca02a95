"""International kidney exchange simulation library.

Multi-round pools of patient-donor pairs shared by several countries,
game-theoretic target allocations (Shapley, nucleolus, Banzhaf, tau, benefit,
contribution), a cross-round credit ledger, and maximum matchings that
lexicographically minimize country deviations from the targets.
"""

from .graph import (
    BLOOD_TYPES,
    PRA_CLASSES,
    CompatibilityGraph,
    GraphError,
    MatchedCounts,
    Matching,
    Vertex,
    graph_from_dict,
    graph_to_dict,
    induced_subgraph,
    load_graph,
    matched_counts,
    save_graph,
)
from .matching import (
    IntervalConstraints,
    MatchingError,
    WeightedGraph,
    enumerate_maximum_matchings,
    interval_feasible_maximum_matching,
    interval_feasible_via_weighted,
    max_weight_perfect_matching,
    maximum_matching,
    maximum_matching_size,
)
from .games import (
    CharacteristicFunction,
    GameError,
    accumulate_games,
    credit_adjusted_game,
    generate_game,
    is_convex,
    is_essential,
    is_quasibalanced,
    surplus,
)
from .concepts import (
    Allocation,
    banzhaf,
    benefit,
    contribution,
    core_nonempty,
    excess_vector,
    min_excess,
    nucleolus,
    shapley,
    tau,
)
from .balancing import (
    DeviationVector,
    arbitrary_maximum_matching,
    deviation_vector,
    lexmin_matching,
    lexmin_matching_bisect,
    min_d1_matching,
)
from .credits import (
    CONCEPTS,
    CreditLedger,
    RoundRecord,
    UndefinedConceptError,
    initial_allocation,
    target_allocation,
    update_credits,
)
from .simulator import (
    SCENARIOS,
    ConfigError,
    InstanceReport,
    SimulationConfig,
    generate_instance,
    no_cooperation_baseline,
    run_batch,
    run_instance,
)
from .reporting import (
    AggregateReport,
    aggregate,
    emit,
    max_relative_deviation,
    total_relative_deviation,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AggregateReport",
    "BLOOD_TYPES",
    "CONCEPTS",
    "CharacteristicFunction",
    "CompatibilityGraph",
    "ConfigError",
    "CreditLedger",
    "DeviationVector",
    "GameError",
    "GraphError",
    "InstanceReport",
    "IntervalConstraints",
    "MatchedCounts",
    "Matching",
    "MatchingError",
    "PRA_CLASSES",
    "RoundRecord",
    "SCENARIOS",
    "SimulationConfig",
    "UndefinedConceptError",
    "Vertex",
    "WeightedGraph",
    "accumulate_games",
    "aggregate",
    "arbitrary_maximum_matching",
    "banzhaf",
    "benefit",
    "contribution",
    "core_nonempty",
    "credit_adjusted_game",
    "deviation_vector",
    "emit",
    "enumerate_maximum_matchings",
    "excess_vector",
    "generate_game",
    "generate_instance",
    "graph_from_dict",
    "graph_to_dict",
    "induced_subgraph",
    "initial_allocation",
    "interval_feasible_maximum_matching",
    "interval_feasible_via_weighted",
    "is_convex",
    "is_essential",
    "is_quasibalanced",
    "lexmin_matching",
    "lexmin_matching_bisect",
    "load_graph",
    "matched_counts",
    "max_relative_deviation",
    "max_weight_perfect_matching",
    "maximum_matching",
    "maximum_matching_size",
    "min_d1_matching",
    "min_excess",
    "no_cooperation_baseline",
    "nucleolus",
    "run_batch",
    "run_instance",
    "save_graph",
    "shapley",
    "surplus",
    "target_allocation",
    "tau",
    "total_relative_deviation",
    "update_credits",
]
