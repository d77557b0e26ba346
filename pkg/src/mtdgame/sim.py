"""Monte-Carlo rotation under stationary policies.

Each episode draws from its own SplitMix64 stream keyed by
``(seed, episode)``, so results do not depend on scheduling. Summaries
reduce per-episode returns with :func:`math.fsum`, which is independent of
summation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .equilibrium import StationaryPolicy
from .game import GameError, GameSpec, StateId, cost, stage_tables
from .strategies import cost_table, eval_horizon

GOLDEN = 0x9E3779B97F4A7C15
MASK = 0xFFFFFFFFFFFFFFFF


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class EpisodeStream:
    """Scalar SplitMix64 stream, identical to the one the kernels use."""

    def __init__(self, seed: int, episode: int):
        self.state = _mix((((seed & MASK) * GOLDEN) & MASK) ^ episode)

    def uniform(self) -> float:
        self.state = (self.state + GOLDEN) & MASK
        return (_mix(self.state) >> 11) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class Step:
    state: int
    defender_action: int
    attacker_action: int
    defender_utility: float
    attacker_utility: float
    n: int


@dataclass(frozen=True)
class EpisodeRecord:
    seed: int
    episode: int
    start: int
    steps: tuple[Step, ...]
    discounted_return_defender: float
    discounted_return_attacker: float


@dataclass(frozen=True)
class SimulationSummary:
    episodes: int
    horizon: int
    start: int
    seed: int
    mean_defender: float
    se_defender: float
    mean_attacker: float
    se_attacker: float
    visit_distribution: np.ndarray
    defender_action_freq: np.ndarray
    attacker_action_freq: np.ndarray
    switches: int

    @property
    def steps(self) -> int:
        return self.episodes * self.horizon


def sim_horizon(spec: GameSpec, rel_tol: float = 1e-6) -> int:
    """Horizon whose truncated tail is below ``rel_tol`` of the utility scale."""
    bound = stage_tables(spec).bound
    return eval_horizon(spec, rel_tol * max(bound, 1.0) / (1 - spec.discount), bound)


def _cdf(policy: StationaryPolicy, actions: int, spec: GameSpec, who: str) -> np.ndarray:
    probs = policy.probs if isinstance(policy, StationaryPolicy) else StationaryPolicy(policy).probs
    if probs.shape != (actions, spec.num_states):
        raise GameError(f"{who} policy must have shape {(actions, spec.num_states)}, got {probs.shape}")
    return np.cumsum(probs, axis=0)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.shape[0]
    mean = math.fsum(values.tolist()) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum(((values - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def _start(start) -> int:
    return start.index if isinstance(start, StateId) else int(start)


def simulate(
    E,
    H,
    start,
    horizon: int,
    episodes: int,
    seed: int,
    spec: GameSpec,
) -> SimulationSummary:
    if horizon < 1 or episodes < 1:
        raise GameError("horizon and episodes must both be >= 1")
    s0 = _start(start)
    if not 0 <= s0 < spec.num_states:
        raise GameError(f"start state {s0} out of range")
    e_cdf = _cdf(E, spec.num_states, spec, "defender")
    h_cdf = _cdf(H, spec.num_techniques, spec, "attacker")
    tables = stage_tables(spec)
    ret1, ret2, visits, d_counts, a_counts, switches = kernels.simulate(
        e_cdf,
        h_cdf,
        tables.defender,
        tables.attacker,
        cost_table(spec, horizon),
        s0,
        horizon,
        spec.discount,
        seed,
        episodes,
    )
    m1, se1 = _mean_se(ret1)
    m2, se2 = _mean_se(ret2)
    with np.errstate(invalid="ignore", divide="ignore"):
        d_freq = np.where(visits > 0, d_counts / np.maximum(visits, 1), 0.0)
        a_freq = np.where(visits > 0, a_counts / np.maximum(visits, 1), 0.0)
    return SimulationSummary(
        episodes,
        horizon,
        s0,
        seed,
        m1,
        se1,
        m2,
        se2,
        visits / visits.sum(),
        d_freq,
        a_freq,
        int(switches),
    )


def simulate_states(E, H, horizon: int, episodes: int, seed: int, spec: GameSpec):
    return [simulate(E, H, s, horizon, episodes, seed, spec) for s in range(spec.num_states)]


def simulate_episode(E, H, start, horizon: int, seed: int, episode: int, spec: GameSpec) -> EpisodeRecord:
    """Replay one episode step by step, with the same draws as :func:`simulate`."""
    e_cdf = _cdf(E, spec.num_states, spec, "defender")
    h_cdf = _cdf(H, spec.num_techniques, spec, "attacker")
    tables = stage_tables(spec)
    rng = EpisodeStream(seed, episode)
    s = _start(start)
    n = 0
    disc = 1.0
    r1 = r2 = 0.0
    steps = []
    for _ in range(horizon):
        ua, ub = rng.uniform(), rng.uniform()
        a1 = min(int((ua >= e_cdf[:, s]).sum()), spec.num_states - 1)
        a2 = min(int((ub >= h_cdf[:, s]).sum()), spec.num_techniques - 1)
        u1 = float(tables.defender[s, a1, a2]) - cost(spec.cost_model, n)
        u2 = float(tables.attacker[s, a1, a2])
        steps.append(Step(s, a1, a2, u1, u2, n))
        r1 = r1 + disc * u1
        r2 = r2 + disc * u2
        n = n + 1 if a1 != s else 0
        s = a1
        disc *= spec.discount
    return EpisodeRecord(seed, episode, _start(start), tuple(steps), r1, r2)


def empirical_switch_rate(summary: SimulationSummary) -> float:
    if summary.steps == 0:
        raise GameError("empty simulation summary")
    return summary.switches / summary.steps
