"""Stationary policies from bimatrix equilibria, their values, and deviation checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .game import GameError, GameSpec, cost, stage_tables
from .strategies import DEFAULT_EVAL_TOL, eval_horizon

DEFAULT_CERT_TOL = 1e-6


@dataclass(frozen=True)
class StationaryPolicy:
    """``probs[a, s]`` is the probability of action ``a`` in state ``s``."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2:
            raise GameError(f"policy must be a 2-D actions x states array, got shape {probs.shape}")
        if (probs < -1e-12).any() or np.abs(probs.sum(axis=0) - 1).max() > 1e-9:
            raise GameError("every policy column must be a probability distribution")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def num_actions(self) -> int:
        return self.probs.shape[0]

    @property
    def num_states(self) -> int:
        return self.probs.shape[1]

    def column(self, s: int) -> np.ndarray:
        return self.probs[:, s]


def _probs(policy) -> np.ndarray:
    return policy.probs if isinstance(policy, StationaryPolicy) else StationaryPolicy(policy).probs


def project_policy(
    mixed: Sequence, strategies: Iterable[Sequence[int]], num_actions: int
) -> StationaryPolicy:
    """Aggregate strategy-level probabilities into per-state action probabilities.

    ``probs[i, j]`` sums ``mixed[l]`` over strategies ``l`` choosing action
    ``i`` in state ``j``. Fractions are summed exactly before conversion.
    """
    sums: list[list] | None = None
    count = 0
    for weight, strategy in zip(mixed, strategies, strict=False):
        count += 1
        if sums is None:
            zero = weight * 0
            sums = [[zero] * len(strategy) for _ in range(num_actions)]
        if len(strategy) != len(sums[0]):
            raise GameError("strategies have inconsistent lengths")
        if weight == 0:
            continue
        for j, a in enumerate(strategy):
            if not 0 <= a < num_actions:
                raise GameError(f"action {a} out of range [0, {num_actions})")
            sums[a][j] += weight
    if sums is None or count != len(mixed):
        raise GameError(
            f"mixed vector has {len(mixed)} entries but {count} strategies were supplied"
        )
    return StationaryPolicy(np.array([[float(v) for v in row] for row in sums]))


def uniform_policy(action_count: int, K: int) -> StationaryPolicy:
    if action_count < 1 or K < 1:
        raise GameError("need at least one action and one state")
    return StationaryPolicy(np.full((action_count, K), 1.0 / action_count))


def _expected_stage(E: np.ndarray, H: np.ndarray, table: np.ndarray) -> np.ndarray:
    """``out[s, a1]``: stage utility of defender action ``a1`` averaged over ``H[:, s]``."""
    return np.einsum("sab,bs->sa", table, H)


def _check_shapes(E: np.ndarray, H: np.ndarray, spec: GameSpec) -> None:
    K, N = spec.num_states, spec.num_techniques
    if E.shape != (K, K) or H.shape != (N, K):
        raise GameError(f"expected policies of shape {(K, K)} and {(N, K)}, got {E.shape}, {H.shape}")


def _chain_values(E: np.ndarray, rewards: np.ndarray, beta: float) -> np.ndarray:
    K = rewards.shape[0]
    P = E.T  # P[s, s'] = probability of moving s -> s'
    system = np.eye(K) - beta * P
    try:
        return np.linalg.solve(system, rewards)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError("singular evaluation system") from exc


def _costly_dp(E, r1, spec: GameSpec, horizon: int, best_response: bool) -> np.ndarray:
    """Finite-horizon DP over ``(state, n)``; ``best_response`` maximises instead of averaging."""
    K = r1.shape[0]
    beta = spec.discount
    width = horizon + 1
    costs = np.array([cost(spec.cost_model, n) for n in range(width)])
    V = np.zeros((K, width + 1))
    for _ in range(horizon):
        new = np.empty_like(V)
        for s in range(K):
            q = np.empty((K, width + 1))
            for a in range(K):
                if a == s:
                    cont = np.full(width + 1, V[a, 0])
                else:
                    cont = np.append(V[a, 1:], V[a, -1])
                q[a] = r1[s, a] + beta * cont
            q[:, :width] -= costs
            q[:, width] -= costs[-1]
            new[s] = q.max(axis=0) if best_response else E[:, s] @ q
        V = new
    return V[:, 0]


@dataclass(frozen=True)
class PolicyValues:
    defender: np.ndarray
    attacker: np.ndarray


def policy_values(E, H, spec: GameSpec, tol: float = DEFAULT_EVAL_TOL) -> PolicyValues:
    """Per-state discounted values of both players under stationary policies."""
    E, H = _probs(E), _probs(H)
    _check_shapes(E, H, spec)
    tables = stage_tables(spec)
    r1 = _expected_stage(E, H, tables.defender)
    r2 = _expected_stage(E, H, tables.attacker)
    attacker = _chain_values(E, np.einsum("sa,as->s", r2, E), spec.discount)
    if spec.cost_model.active:
        T = eval_horizon(spec, tol, tables.bound)
        defender = _costly_dp(E, r1, spec, T, best_response=False)
    else:
        defender = _chain_values(E, np.einsum("sa,as->s", r1, E), spec.discount)
    return PolicyValues(defender, attacker)


def truncated_defender_values(E, H, spec: GameSpec, horizon: int) -> np.ndarray:
    """Defender values summed over exactly ``horizon`` steps, cost included."""
    E, H = _probs(E), _probs(H)
    _check_shapes(E, H, spec)
    if horizon < 1:
        raise GameError(f"horizon must be >= 1, got {horizon}")
    r1 = _expected_stage(E, H, stage_tables(spec).defender)
    return _costly_dp(E, r1, spec, horizon, best_response=False)


def attacker_myopic_values(E, H, spec: GameSpec) -> tuple[np.ndarray, np.ndarray]:
    """Attacker's expected first-step utility per state and its best-response maximum."""
    E, H = _probs(E), _probs(H)
    # ubar[s, a2] averages over the defender's column in s
    ubar = np.einsum("sab,as->sb", stage_tables(spec).attacker, E)
    return np.einsum("sb,bs->s", ubar, H), ubar.max(axis=1)


def _defender_best_response(E, H, spec: GameSpec, tol: float) -> np.ndarray:
    tables = stage_tables(spec)
    r1 = _expected_stage(E, H, tables.defender)
    beta = spec.discount
    if spec.cost_model.active:
        return _costly_dp(E, r1, spec, eval_horizon(spec, tol, tables.bound), best_response=True)
    K = r1.shape[0]
    V = np.zeros(K)
    while True:
        new = (r1 + beta * V[None, :]).max(axis=1)
        gap = np.abs(new - V).max()
        V = new
        if gap * beta / (1 - beta) < tol:
            break
    # polish: policy iteration from the greedy policy ends at an exact optimum
    f = (r1 + beta * V[None, :]).argmax(axis=1)
    for _ in range(K * K + 1):
        P = np.zeros((K, K))
        P[np.arange(K), f] = 1.0
        V = _chain_values(P.T, r1[np.arange(K), f], beta)
        q = r1 + beta * V[None, :]
        better = q.max(axis=1) > q[np.arange(K), f] + 1e-12 * max(1.0, np.abs(V).max())
        if not better.any():
            return V
        f = np.where(better, q.argmax(axis=1), f)
    return V


@dataclass(frozen=True)
class DeviationReport:
    passed: bool
    eps: float
    defender_values: np.ndarray
    defender_best: np.ndarray
    attacker_values: np.ndarray
    attacker_best: np.ndarray

    @property
    def defender_regret(self) -> np.ndarray:
        return self.defender_best - self.defender_values

    @property
    def attacker_regret(self) -> np.ndarray:
        return self.attacker_best - self.attacker_values

    @property
    def max_regret(self) -> float:
        return float(max(self.defender_regret.max(), self.attacker_regret.max()))


def deviation_certificate(
    E, H, spec: GameSpec, eps: float = DEFAULT_CERT_TOL, attacker_mode: str = "myopic"
) -> DeviationReport:
    """Check that neither player gains more than ``eps`` in any state by deviating.

    The defender's best response is the optimal policy of the MDP it
    controls against ``H``. The attacker cannot move the state, so its best
    response maximises the stage utility state by state; ``attacker_mode``
    chooses whether values are compared at the first step (``"myopic"``)
    or discounted along the defender's chain (``"discounted"``).
    """
    if attacker_mode not in ("myopic", "discounted"):
        raise ValueError(f"attacker_mode must be 'myopic' or 'discounted', got {attacker_mode!r}")
    E, H = _probs(E), _probs(H)
    _check_shapes(E, H, spec)
    values = policy_values(E, H, spec, tol=min(DEFAULT_EVAL_TOL, eps / 10))
    best = _defender_best_response(E, H, spec, eps / 10)
    a_val, a_best = attacker_myopic_values(E, H, spec)
    if attacker_mode == "discounted":
        a_val = values.attacker
        a_best = _chain_values(E, a_best, spec.discount)
    passed = bool((best - values.defender <= eps).all() and (a_best - a_val <= eps).all())
    return DeviationReport(passed, eps, values.defender, best, a_val, a_best)


def percentage_increase(v_eq: Sequence[float], v_alt: Sequence[float]) -> list[float | None]:
    """Per-state ``100 * (v_eq - v_alt) / |v_alt|``; ``None`` where the baseline is zero."""
    if len(v_eq) != len(v_alt):
        raise GameError("value vectors differ in length")
    return [
        None if b == 0 else 100.0 * (float(a) - float(b)) / abs(float(b))
        for a, b in zip(v_eq, v_alt)
    ]

