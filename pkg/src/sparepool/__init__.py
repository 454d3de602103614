"""Cooperative spare-parts pooling: solvers, game assembly, and verification.

The package computes the optimal long-run cost of every coalition of
service providers pooling their spare-parts stock (a small accept/repair
MDP per coalition), assembles the resulting cost game, decides core
non-emptiness two independent ways (weighted-family inequalities with
exact rational weights, and a least-core LP), and replays the finite-
horizon chain of identities that links the two sides of the stability
inequality.
"""

from .chain import (
    ConvexMinCheck,
    LabeledCoalition,
    LabeledCoalitionSet,
    LemmaCheck,
    LemmaReport,
    ProductValueTable,
    anonymized_value,
    combined_value,
    labeled_coalitions,
    midpoint_convex_min,
    relaxed_value,
    verify_chain,
)
from .core import (
    BalancedCollection,
    BalancednessReport,
    CoreMembership,
    LeastCoreResult,
    check_balancedness,
    enumerate_minimal_balanced,
    in_core,
    least_core,
    least_core_exact,
)
from .errors import (
    LPError,
    NonConvergenceError,
    ParseError,
    ReducibleChainError,
    SizeCapError,
    ValidationError,
)
from .game import (
    CharacteristicGame,
    SubadditivityReport,
    build_game,
    game_from_document,
    is_subadditive,
)
from .mdp import (
    ActionProfile,
    AverageCostResult,
    StationaryPolicy,
    ValueTable,
    average_cost,
    extract_policy,
    stage_cost,
    state_independence_spread,
    state_space,
    transition,
    value_iterate,
)
from .oracle import (
    BirthDeathChain,
    SimulationResult,
    brute_force_optimum,
    enumerate_policies,
    exact_policy_cost,
    simulate,
    stationary_distribution,
)
from .situation import (
    NormalizedRates,
    PlayerSpec,
    SparePartsSituation,
    coalition_capacity,
    normalize,
    parse_situation,
    situation_to_document,
    validate_coalition,
    validation_warnings,
)

__version__ = "0.1.0"

__all__ = [
    "ActionProfile",
    "AverageCostResult",
    "BalancedCollection",
    "BalancednessReport",
    "BirthDeathChain",
    "CharacteristicGame",
    "ConvexMinCheck",
    "CoreMembership",
    "LPError",
    "LabeledCoalition",
    "LabeledCoalitionSet",
    "LeastCoreResult",
    "LemmaCheck",
    "LemmaReport",
    "NonConvergenceError",
    "NormalizedRates",
    "ParseError",
    "PlayerSpec",
    "ProductValueTable",
    "ReducibleChainError",
    "SimulationResult",
    "SizeCapError",
    "SparePartsSituation",
    "StationaryPolicy",
    "SubadditivityReport",
    "ValidationError",
    "ValueTable",
    "anonymized_value",
    "average_cost",
    "brute_force_optimum",
    "build_game",
    "check_balancedness",
    "coalition_capacity",
    "combined_value",
    "enumerate_minimal_balanced",
    "enumerate_policies",
    "exact_policy_cost",
    "extract_policy",
    "game_from_document",
    "in_core",
    "is_subadditive",
    "labeled_coalitions",
    "least_core",
    "least_core_exact",
    "midpoint_convex_min",
    "normalize",
    "parse_situation",
    "relaxed_value",
    "simulate",
    "situation_to_document",
    "stage_cost",
    "state_independence_spread",
    "state_space",
    "stationary_distribution",
    "transition",
    "validate_coalition",
    "validation_warnings",
    "value_iterate",
    "verify_chain",
]
