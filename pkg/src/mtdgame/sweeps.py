"""Parameter sweeps behind the experiment commands.

Every sweep point is an independent solve; with ``jobs > 1`` they run in a
process pool and come back in input order.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .equilibrium import percentage_increase, policy_values, uniform_policy
from .game import CostModel, GameError, GameSpec
from .pipeline import solve
from .strategies import DEFAULT_MAX_CELLS


@dataclass(frozen=True)
class PointResult:
    spec: GameSpec
    defender: tuple[float, ...]
    attacker: tuple[float, ...]
    uniform_defender: tuple[float, ...]
    certified: bool


def _solve_point(args) -> PointResult:
    spec, label, max_cells = args
    sol = solve(spec, label=label, max_cells=max_cells)
    uniform = policy_values(
        uniform_policy(spec.num_states, spec.num_states), sol.attacker_policy, spec
    ).defender
    return PointResult(
        spec,
        tuple(sol.values.defender.tolist()),
        tuple(sol.values.attacker.tolist()),
        tuple(uniform.tolist()),
        sol.certificate.passed,
    )


def solve_many(specs, label: int = 1, max_cells=DEFAULT_MAX_CELLS, jobs: int = 1) -> list[PointResult]:
    work = [(s, label, max_cells) for s in specs]
    if jobs <= 1 or len(work) <= 1:
        return [_solve_point(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_point, work))


def beta_grid(start: float, stop: float, step: float) -> list[float]:
    if not 0 < start <= stop < 1:
        raise GameError(f"need 0 < from <= to < 1, got from={start}, to={stop}")
    if step <= 0:
        raise GameError(f"step must be positive, got {step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def sweep_beta(spec: GameSpec, betas, label=1, max_cells=DEFAULT_MAX_CELLS, jobs=1) -> list[dict]:
    points = solve_many([spec.replace(discount=b) for b in betas], label, max_cells, jobs)
    rows = []
    for p in points:
        for s in range(spec.num_states):
            rows.append(
                {
                    "beta": p.spec.discount,
                    "state": s + 1,
                    "value_defender": p.defender[s],
                    "value_attacker": p.attacker[s],
                    "certified": p.certified,
                }
            )
    return rows


def compare_uniform(spec: GameSpec, betas=None, label=1, max_cells=DEFAULT_MAX_CELLS, jobs=1) -> list[dict]:
    """Equilibrium versus the uniform defender policy, both against the equilibrium attacker."""
    betas = [spec.discount] if betas is None else betas
    points = solve_many([spec.replace(discount=b) for b in betas], label, max_cells, jobs)
    rows = []
    for p in points:
        increase = percentage_increase(p.defender, p.uniform_defender)
        for s in range(spec.num_states):
            rows.append(
                {
                    "beta": p.spec.discount,
                    "state": s + 1,
                    "v_eq": p.defender[s],
                    "v_uniform": p.uniform_defender[s],
                    "percent_increase": increase[s],
                }
            )
    return rows


def sweep_cost(
    spec: GameSpec, models, q: float, betas, state: int, label=1, max_cells=DEFAULT_MAX_CELLS, jobs=1
) -> list[dict]:
    """Defender value at ``state`` (1-based) for every (beta, cost model) pair."""
    if not 1 <= state <= spec.num_states:
        raise GameError(f"state must lie in [1, {spec.num_states}], got {state}")
    grid = [(b, m) for b in betas for m in models]
    specs = [spec.replace(discount=b, cost_model=CostModel(m, q)) for b, m in grid]
    points = solve_many(specs, label, max_cells, jobs)
    return [
        {
            "beta": b,
            "model": m,
            "state": state,
            "value_defender": p.defender[state - 1],
            "certified": p.certified,
        }
        for (b, m), p in zip(grid, points)
    ]


def sweep_power(
    spec: GameSpec, scenarios, beta: float = 0.75, label=1, max_cells=DEFAULT_MAX_CELLS, jobs=1
) -> list[dict]:
    """One solve per ``(defender_power, attacker_power)`` scenario at a fixed discount."""
    specs = []
    for p1, p2 in scenarios:
        if len(p1) != spec.num_techniques or len(p2) != spec.num_techniques:
            raise GameError(f"each power vector needs {spec.num_techniques} entries")
        specs.append(spec.replace(discount=beta, defender_power=tuple(p1), attacker_power=tuple(p2)))
    points = solve_many(specs, label, max_cells, jobs)
    rows = []
    for (p1, p2), p in zip(scenarios, points):
        name = "P1=" + "/".join(f"{v:g}" for v in p1) + " P2=" + "/".join(f"{v:g}" for v in p2)
        for s in range(spec.num_states):
            rows.append(
                {
                    "scenario": name,
                    "beta": beta,
                    "state": s + 1,
                    "value_defender": p.defender[s],
                    "value_attacker": p.attacker[s],
                    "certified": p.certified,
                }
            )
    return rows
