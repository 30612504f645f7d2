"""Exact-arithmetic toolkit for belief-invariant Bayes correlated equilibria,
potential structure, and robustness of finite incomplete-information games.

Everything is computed over arbitrary-precision rationals: equilibrium
polytopes, potential certification, perturbation families, and distances
between equilibrium outcomes are all exact and bit-reproducible.
"""

from .game import (
    CommunicationRule,
    Game,
    GameError,
    SupportSets,
    ValidationReport,
    conjunction,
    is_minimal,
    minimum_representation,
    validate_game,
)
from .hierarchy import TypeQuotientMap, non_redundant_representation
from .measures import FiniteMeasure, sup_event_distance
from .rational import Rat, rat, rat_str
from .rules import (
    OFF_SUPPORT,
    DistributionalRule,
    StateMap,
    TypeMap,
    outcome_equivalent,
    pushforward,
)
from .lp import LinearProgram, LpError, LpOutcome, maximize_then_restrict, solve
from .equilibria import (
    EquilibriumPolytope,
    StrategyProfile,
    bce_constraints,
    bibce_constraints,
    enumerate_pure_bne,
    extremal_bne_supermodular,
    find_bibce,
    iterated_strict_dominance,
)
from .potentials import (
    ADecisionRule,
    Certified,
    Counterexample,
    Covering,
    GeneralizedPotential,
    MonotonePotential,
    PotentialFunction,
    PotentialResult,
    find_monotone_potential,
    find_potential,
    gp_from_monotone,
    gp_maximizing_bibce,
    maximize_potential_bibce,
    verify_generalized_potential,
    verify_potential,
)
from .supermodular import (
    CommonBeliefReport,
    LatticeMeasure,
    OrderedGame,
    common_belief_event,
    extremal_selections,
    is_supermodular,
    is_supermodular_function,
    kappa,
    order_rearrange,
)
from .elaborations import (
    ElaborationWitness,
    email_game_family,
    epsilon_of,
    global_game,
    global_game_expected_potential,
    global_game_potential_table,
    global_game_tau_star,
    motivating_example,
    random_epsilon_elaboration,
    threshold_strategy,
    verify_elaboration,
)
from .harness import (
    MinDistanceResult,
    Report,
    SweepReport,
    TargetSet,
    min_distance_to_set,
    reproduce_global_game_example,
    reproduce_motivating_example,
    robustness_sweep,
    target_full_bibce,
    target_gp_face,
    target_potential_face,
)

__version__ = "0.1.0"
