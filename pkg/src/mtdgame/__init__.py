"""Single-controller stochastic game for encryption-rotation moving target defense."""
__version__ = "0.1.0"

from .equilibrium import (
    DeviationReport,
    PolicyValues,
    StationaryPolicy,
    deviation_certificate,
    percentage_increase,
    policy_values,
    project_policy,
    uniform_policy,
)
from .game import (
    AttackerAction,
    CostModel,
    DefenderAction,
    GameError,
    GameSpec,
    StateId,
    attacker_stage_utility,
    cost,
    defender_stage_utility,
    max_slot_duration,
    next_state,
    state_index,
    transition_reward,
    update_consecutive_changes,
)
from .pipeline import Solution, solve
from .solver import (
    MixedStrategyPair,
    lemke_howson,
    support_enumeration,
    verify_nash,
)
from .strategies import (
    BimatrixGame,
    BudgetExceeded,
    build_bimatrix,
    discounted_defender_value,
    enumerate_attacker_strategies,
    enumerate_defender_strategies,
    myopic_attacker_value,
    trajectory,
)
