"""Domain model of the encryption-rotation MTD game.

States are (technique, key) combinations enumerated as
``index = technique * M + key``. The defender picks the next combination,
the attacker picks a technique to brute-force. Transitions are
deterministic and depend on the defender only.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

COST_KINDS = ("none", "linear", "log")

# Which technique the defender's reward compares the attacked technique to.
DEFENDER_RULES = ("current", "target")
# When the attacker earns the high reward.
ATTACKER_RULES = ("match_and_keep", "current", "target")


class GameError(ValueError):
    """Invalid game parameters or out-of-range indices."""


class StateId(NamedTuple):
    index: int
    technique: int
    key: int


class DefenderAction(NamedTuple):
    target: StateId


class AttackerAction(NamedTuple):
    technique: int


@dataclass(frozen=True)
class CostModel:
    kind: str = "none"
    q: float = 0.0

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise GameError(f"unknown cost model {self.kind!r}, expected one of {COST_KINDS}")
        if not (self.q >= 0 and math.isfinite(self.q)):
            raise GameError(f"cost value q must be finite and >= 0, got {self.q}")

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.q > 0


def cost(model: CostModel, n: int) -> float:
    """Switching cost after ``n`` consecutive method changes."""
    if n < 0:
        raise GameError(f"n must be >= 0, got {n}")
    if model.kind == "linear":
        return model.q * n
    if model.kind == "log":
        return model.q * math.log(n + 1)
    return 0.0


@dataclass(frozen=True)
class GameSpec:
    num_techniques: int = 2
    keys_per_technique: int = 2
    discount: float = 0.75
    defender_reward_other_tech: float = 10.0
    defender_reward_same_tech: float = 5.0
    attacker_reward_match: float = 10.0
    attacker_reward_miss: float = 5.0
    defender_power: tuple[float, ...] = (1.0, 3.0)
    attacker_power: tuple[float, ...] = (1.0, 3.0)
    transition_reward_key: float = 5.0
    transition_reward_technique: float = 10.0
    transition_reward_stay: float = 0.0
    cost_model: CostModel = field(default_factory=CostModel)
    brute_force_times: tuple[float, ...] | None = None
    slot_margin: float = 0.9
    defender_rule: str = "current"
    attacker_rule: str = "current"

    def __post_init__(self):
        # normalise list inputs so the spec stays hashable
        object.__setattr__(self, "defender_power", tuple(float(p) for p in self.defender_power))
        object.__setattr__(self, "attacker_power", tuple(float(p) for p in self.attacker_power))
        if self.brute_force_times is not None:
            object.__setattr__(
                self, "brute_force_times", tuple(float(t) for t in self.brute_force_times)
            )
        if not (isinstance(self.num_techniques, int) and self.num_techniques >= 1):
            raise GameError(f"num_techniques must be a positive integer, got {self.num_techniques!r}")
        if not (isinstance(self.keys_per_technique, int) and self.keys_per_technique >= 1):
            raise GameError(
                f"keys_per_technique must be a positive integer, got {self.keys_per_technique!r}"
            )
        if not 0 < self.discount < 1:
            raise GameError(f"discount must lie strictly between 0 and 1, got {self.discount}")
        for name in ("defender_power", "attacker_power"):
            powers = getattr(self, name)
            if len(powers) != self.num_techniques:
                raise GameError(
                    f"{name} needs {self.num_techniques} entries, got {len(powers)}"
                )
            if any(p < 0 or not math.isfinite(p) for p in powers):
                raise GameError(f"{name} entries must be finite and >= 0")
        reals = (
            self.defender_reward_other_tech,
            self.defender_reward_same_tech,
            self.attacker_reward_match,
            self.attacker_reward_miss,
            self.transition_reward_key,
            self.transition_reward_technique,
            self.transition_reward_stay,
        )
        if not all(math.isfinite(v) for v in reals):
            raise GameError("rewards must be finite")
        if self.brute_force_times is not None and any(t <= 0 for t in self.brute_force_times):
            raise GameError("brute_force_times must be positive")
        if not 0 < self.slot_margin <= 1:
            raise GameError(f"slot margin must lie in (0, 1], got {self.slot_margin}")
        if self.defender_rule not in DEFENDER_RULES:
            raise GameError(f"defender_rule must be one of {DEFENDER_RULES}")
        if self.attacker_rule not in ATTACKER_RULES:
            raise GameError(f"attacker_rule must be one of {ATTACKER_RULES}")

    @property
    def num_states(self) -> int:
        return self.num_techniques * self.keys_per_technique

    def states(self) -> list[StateId]:
        return [state_from_index(i, self) for i in range(self.num_states)]

    def replace(self, **changes) -> "GameSpec":
        from dataclasses import replace

        return replace(self, **changes)


def state_index(technique: int, key: int, spec: GameSpec) -> StateId:
    if not 0 <= technique < spec.num_techniques:
        raise GameError(f"technique {technique} out of range [0, {spec.num_techniques})")
    if not 0 <= key < spec.keys_per_technique:
        raise GameError(f"key {key} out of range [0, {spec.keys_per_technique})")
    return StateId(technique * spec.keys_per_technique + key, technique, key)


def state_from_index(index: int, spec: GameSpec) -> StateId:
    if not 0 <= index < spec.num_states:
        raise GameError(f"state index {index} out of range [0, {spec.num_states})")
    technique, key = divmod(index, spec.keys_per_technique)
    return StateId(index, technique, key)


def transition_reward(a1: DefenderAction, s: StateId, spec: GameSpec) -> float:
    if a1.target.index == s.index:
        return spec.transition_reward_stay
    if a1.target.technique != s.technique:
        return spec.transition_reward_technique
    return spec.transition_reward_key


def _defender_high(a1: DefenderAction, a2: AttackerAction, s: StateId, spec: GameSpec) -> bool:
    if spec.defender_rule == "target":
        return a2.technique != a1.target.technique
    return a2.technique != s.technique


def _attacker_high(a1: DefenderAction, a2: AttackerAction, s: StateId, spec: GameSpec) -> bool:
    if spec.attacker_rule == "target":
        return a2.technique == a1.target.technique
    if spec.attacker_rule == "current":
        return a2.technique == s.technique
    return a2.technique == s.technique and a1.target.technique == s.technique


def defender_stage_utility(
    a1: DefenderAction, a2: AttackerAction, s: StateId, n: int, spec: GameSpec
) -> float:
    reward = (
        spec.defender_reward_other_tech
        if _defender_high(a1, a2, s, spec)
        else spec.defender_reward_same_tech
    )
    return (
        reward
        + transition_reward(a1, s, spec)
        - spec.defender_power[s.technique]
        - cost(spec.cost_model, n)
    )


def attacker_stage_utility(
    a1: DefenderAction, a2: AttackerAction, s: StateId, spec: GameSpec
) -> float:
    reward = (
        spec.attacker_reward_match
        if _attacker_high(a1, a2, s, spec)
        else spec.attacker_reward_miss
    )
    return reward - spec.attacker_power[s.technique]


def next_state(a1: DefenderAction) -> StateId:
    return a1.target


def update_consecutive_changes(n: int, s: StateId, s_next: StateId) -> int:
    if n < 0:
        raise GameError(f"n must be >= 0, got {n}")
    return 0 if s_next.index == s.index else n + 1


def max_slot_duration(brute_force_times: Sequence[float], margin: float = 0.9) -> float:
    """Slot length ``margin * min(t_i)``; warns if the result reaches ``min(t_i)``."""
    if len(brute_force_times) == 0:
        raise GameError("need at least one brute-force time")
    if any(t <= 0 for t in brute_force_times):
        raise GameError("brute-force times must be positive")
    if not 0 < margin <= 1:
        raise GameError(f"margin must lie in (0, 1], got {margin}")
    shortest = min(brute_force_times)
    slot = margin * shortest
    if slot >= shortest:
        warnings.warn(
            f"slot duration {slot} is not strictly below the shortest brute-force time {shortest}",
            RuntimeWarning,
            stacklevel=2,
        )
    return slot


def exact(value: float) -> Fraction:
    """Rational read of a float through its shortest decimal repr."""
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class StageTables:
    """Cost-free stage utilities indexed ``[state, defender_action, attacker_action]``."""

    defender: np.ndarray
    attacker: np.ndarray
    defender_exact: tuple
    attacker_exact: tuple

    @property
    def bound(self) -> float:
        return float(max(np.abs(self.defender).max(), np.abs(self.attacker).max()))


@functools.lru_cache(maxsize=64)
def stage_tables(spec: GameSpec) -> StageTables:
    K, N = spec.num_states, spec.num_techniques
    states = spec.states()
    d = np.empty((K, K, N))
    a = np.empty((K, K, N))
    dq = []
    aq = []
    for s in states:
        drow, arow = [], []
        for t in states:
            a1 = DefenderAction(t)
            dcell, acell = [], []
            for tech in range(N):
                a2 = AttackerAction(tech)
                du = defender_stage_utility(a1, a2, s, 0, spec)
                au = attacker_stage_utility(a1, a2, s, spec)
                d[s.index, t.index, tech] = du
                a[s.index, t.index, tech] = au
                # same formula, rational operands
                reward = (
                    exact(spec.defender_reward_other_tech)
                    if _defender_high(a1, a2, s, spec)
                    else exact(spec.defender_reward_same_tech)
                )
                trans = exact(transition_reward(a1, s, spec))
                dcell.append(reward + trans - exact(spec.defender_power[s.technique]))
                areward = (
                    exact(spec.attacker_reward_match)
                    if _attacker_high(a1, a2, s, spec)
                    else exact(spec.attacker_reward_miss)
                )
                acell.append(areward - exact(spec.attacker_power[s.technique]))
            drow.append(tuple(dcell))
            arow.append(tuple(acell))
        dq.append(tuple(drow))
        aq.append(tuple(arow))
    d.setflags(write=False)
    a.setflags(write=False)
    return StageTables(d, a, tuple(dq), tuple(aq))
