"""Pure stationary strategies and the bimatrix game they induce.

Rows of the bimatrix are defender strategies (one target state per state,
``K**K`` of them), columns are attacker strategies (one technique per
state, ``N**K``). The defender's entry is its discounted utility summed
over start states; the attacker's entry is its first-step utility summed
over start states.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .game import GameSpec, StageTables, StateId, cost, exact, stage_tables

DEFAULT_MAX_CELLS = 10**7
DEFAULT_EVAL_TOL = 1e-9

Strategy = tuple  # one action index per state


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, count: int, limit: int):
        super().__init__(f"{what} needs {count} cells, over the limit of {limit}")
        self.count = count
        self.limit = limit


def _idx(s) -> int:
    return s.index if isinstance(s, StateId) else int(s)


def bimatrix_cells(spec: GameSpec) -> int:
    K = spec.num_states
    return K**K * spec.num_techniques**K


def _check_budget(what: str, count: int, limit: int | None) -> None:
    if limit is not None and count > limit:
        raise BudgetExceeded(what, count, limit)


def enumerate_defender_strategies(
    spec: GameSpec, limit: int | None = DEFAULT_MAX_CELLS
) -> Iterator[Strategy]:
    K = spec.num_states
    _check_budget("defender strategy enumeration", K**K, limit)
    return itertools.product(range(K), repeat=K)


def enumerate_attacker_strategies(
    spec: GameSpec, limit: int | None = DEFAULT_MAX_CELLS
) -> Iterator[Strategy]:
    K = spec.num_states
    _check_budget("attacker strategy enumeration", spec.num_techniques**K, limit)
    return itertools.product(range(spec.num_techniques), repeat=K)


def defender_strategy(row: int, spec: GameSpec) -> Strategy:
    """Strategy at position ``row`` of the lexicographic enumeration."""
    K = spec.num_states
    digits = []
    for _ in range(K):
        row, d = divmod(row, K)
        digits.append(d)
    return tuple(reversed(digits))


@dataclass(frozen=True)
class TrajectoryShape:
    start: int
    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def state_at(self, t: int) -> int:
        if t < len(self.prefix):
            return self.prefix[t]
        return self.cycle[(t - len(self.prefix)) % len(self.cycle)]


def trajectory(f: Sequence[int], start) -> TrajectoryShape:
    s = _idx(start)
    seen: dict[int, int] = {}
    path: list[int] = []
    while s not in seen:
        seen[s] = len(path)
        path.append(s)
        s = f[s]
    entry = seen[s]
    return TrajectoryShape(_idx(start), tuple(path[:entry]), tuple(path[entry:]))


def occupation_weights(f: Sequence[int], start, beta):
    """Discounted visit weight of every state along ``f`` from ``start``.

    Works for floats and Fractions alike: ``beta`` fixes the number type.
    """
    shape = trajectory(f, start)
    weights = [beta * 0] * len(f)
    w = beta**0
    for s in shape.prefix:
        weights[s] += w
        w *= beta
    period = len(shape.cycle)
    scale = 1 / (1 - beta**period)
    for s in shape.cycle:
        weights[s] += w * scale
        w *= beta
    return weights


def eval_horizon(spec: GameSpec, tol: float = DEFAULT_EVAL_TOL, bound: float | None = None) -> int:
    """Smallest ``T`` whose discounted tail, stage and cost terms together, is below ``tol``."""
    beta = spec.discount
    if bound is None:
        bound = stage_tables(spec).bound
    q = spec.cost_model.q if spec.cost_model.active else 0.0

    def tail(T):
        # n_t <= t and ln(1+t) <= t, so the linear tail bounds both cost models
        stage = beta**T * bound / (1 - beta)
        cost_tail = q * beta**T * (T / (1 - beta) + beta / (1 - beta) ** 2)
        return stage + cost_tail

    T = 1
    while tail(T) >= tol:
        T *= 2
    lo, hi = T // 2, T
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) < tol:
            hi = mid
        else:
            lo = mid
    return max(hi, 1)


def cost_table(spec: GameSpec, horizon: int) -> np.ndarray:
    return np.array([cost(spec.cost_model, n) for n in range(horizon)], dtype=np.float64)


def discounted_defender_value(
    f: Sequence[int],
    g: Sequence[int],
    start,
    spec: GameSpec,
    tol: float = DEFAULT_EVAL_TOL,
    exact_arithmetic: bool = False,
):
    """Discounted defender utility of the pure pair ``(f, g)`` from ``start``.

    Cost-free games are solved exactly through the fixed point
    ``phi(s) = u(s) + beta * phi(f(s))``; with a switching cost the sum is
    truncated at a horizon whose tail is below ``tol``.
    """
    tables = stage_tables(spec)
    K = spec.num_states
    s0 = _idx(start)
    if not spec.cost_model.active:
        if exact_arithmetic:
            beta = exact(spec.discount)
            w = occupation_weights(f, s0, beta)
            return sum(
                (w[s] * tables.defender_exact[s][f[s]][g[s]] for s in range(K)), Fraction(0)
            )
        u = np.array([tables.defender[s, f[s], g[s]] for s in range(K)])
        P = np.zeros((K, K))
        P[np.arange(K), list(f)] = 1.0
        phi = np.linalg.solve(np.eye(K) - spec.discount * P, u)
        return float(phi[s0])
    if exact_arithmetic:
        raise ValueError("exact evaluation is only available without a switching cost")
    T = eval_horizon(spec, tol, tables.bound)
    beta = spec.discount
    total, disc, n, s = 0.0, 1.0, 0, s0
    for _ in range(T):
        total += disc * (tables.defender[s, f[s], g[s]] - cost(spec.cost_model, n))
        nxt = f[s]
        n = 0 if nxt == s else n + 1
        s = nxt
        disc *= beta
    if not math.isfinite(total):
        raise ArithmeticError("non-finite accumulated utility")
    return total


def myopic_attacker_value(f: Sequence[int], g: Sequence[int], start, spec: GameSpec) -> float:
    s = _idx(start)
    return float(stage_tables(spec).attacker[s, f[s], g[s]])


@dataclass(frozen=True)
class BimatrixGame:
    X: np.ndarray
    Y: np.ndarray
    X_exact: tuple | None = None
    Y_exact: tuple | None = None

    def __post_init__(self):
        if self.X.shape != self.Y.shape:
            raise ValueError(f"payoff shapes differ: {self.X.shape} vs {self.Y.shape}")
        if not (np.isfinite(self.X).all() and np.isfinite(self.Y).all()):
            raise ValueError("payoff matrices must be finite")

    @classmethod
    def from_arrays(cls, X, Y) -> "BimatrixGame":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return cls(X, Y)

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape


def build_bimatrix(
    spec: GameSpec,
    max_cells: int | None = DEFAULT_MAX_CELLS,
    tol: float = DEFAULT_EVAL_TOL,
    exact_arithmetic: bool | None = None,
    attacker_payoff: str = "myopic",
) -> BimatrixGame:
    """Assemble the defender matrix ``X`` and attacker matrix ``Y``.

    ``exact_arithmetic`` defaults to on for cost-free games, where every
    entry is rational. ``attacker_payoff="discounted"`` swaps the first-step
    attacker entries for discounted ones.
    """
    if attacker_payoff not in ("myopic", "discounted"):
        raise ValueError(f"attacker_payoff must be 'myopic' or 'discounted', got {attacker_payoff!r}")
    _check_budget("bimatrix", bimatrix_cells(spec), max_cells)
    K, N = spec.num_states, spec.num_techniques
    tables = stage_tables(spec)
    costly = spec.cost_model.active
    if exact_arithmetic is None:
        exact_arithmetic = not costly
    if exact_arithmetic and costly:
        raise ValueError("exact bimatrix needs a cost-free game")

    G = np.array(list(enumerate_attacker_strategies(spec, None)), dtype=np.int64).reshape(-1, K)
    rows = K**K
    X = np.empty((rows, G.shape[0]))
    Y = np.empty_like(X)
    Xq, Yq = ([], []) if exact_arithmetic else (None, None)
    beta_q = exact(spec.discount)
    cols = range(K)
    for i, f in enumerate(enumerate_defender_strategies(spec, None)):
        # visit weights summed over all start states, shared by every column
        if exact_arithmetic:
            w = [Fraction(0)] * K
            for s0 in cols:
                for s, v in enumerate(occupation_weights(f, s0, beta_q)):
                    w[s] += v
            wf = np.array([float(v) for v in w])
        else:
            P = np.zeros((K, K))
            P[np.arange(K), list(f)] = 1.0
            wf = np.linalg.solve((np.eye(K) - spec.discount * P).T, np.ones(K))
        d_rows = np.stack([tables.defender[s, f[s], G[:, s]] for s in cols])
        a_rows = np.stack([tables.attacker[s, f[s], G[:, s]] for s in cols])
        X[i] = wf @ d_rows
        Y[i] = (wf @ a_rows) if attacker_payoff == "discounted" else a_rows.sum(axis=0)
        if exact_arithmetic:
            dq = tables.defender_exact
            aq = tables.attacker_exact
            xrow, yrow = [], []
            for g in G:
                xrow.append(sum((w[s] * dq[s][f[s]][g[s]] for s in cols), Fraction(0)))
                if attacker_payoff == "discounted":
                    yrow.append(sum((w[s] * aq[s][f[s]][g[s]] for s in cols), Fraction(0)))
                else:
                    yrow.append(sum((aq[s][f[s]][g[s]] for s in cols), Fraction(0)))
            Xq.append(tuple(xrow))
            Yq.append(tuple(yrow))
            X[i] = [float(v) for v in xrow]
            Y[i] = [float(v) for v in yrow]

    if costly:
        T = eval_horizon(spec, tol, tables.bound)
        F = np.array(list(enumerate_defender_strategies(spec, None)), dtype=np.int64).reshape(-1, K)
        penalty = kernels.trajectory_cost_sums(F, cost_table(spec, T), spec.discount)
        X -= penalty.sum(axis=1)[:, None]

    X.setflags(write=False)
    Y.setflags(write=False)
    return BimatrixGame(
        X, Y, tuple(Xq) if exact_arithmetic else None, tuple(Yq) if exact_arithmetic else None
    )
