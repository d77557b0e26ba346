"""End-to-end solve: bimatrix, Lemke-Howson, projection, values, certificate."""
from __future__ import annotations

from dataclasses import dataclass

from .equilibrium import (
    DEFAULT_CERT_TOL,
    DeviationReport,
    PolicyValues,
    StationaryPolicy,
    deviation_certificate,
    policy_values,
    project_policy,
)
from .game import GameSpec
from .solver import MixedStrategyPair, NashReport, lemke_howson, verify_nash
from .strategies import (
    DEFAULT_MAX_CELLS,
    BimatrixGame,
    build_bimatrix,
    enumerate_attacker_strategies,
    enumerate_defender_strategies,
)


@dataclass(frozen=True)
class Solution:
    spec: GameSpec
    label: int
    game: BimatrixGame
    pair: MixedStrategyPair
    nash: NashReport
    defender_policy: StationaryPolicy
    attacker_policy: StationaryPolicy
    values: PolicyValues
    certificate: DeviationReport


def solve(
    spec: GameSpec,
    label: int = 1,
    max_cells: int | None = DEFAULT_MAX_CELLS,
    eps: float = DEFAULT_CERT_TOL,
    attacker_payoff: str = "myopic",
) -> Solution:
    game = build_bimatrix(spec, max_cells=max_cells, attacker_payoff=attacker_payoff)
    pair = lemke_howson(game, label)
    nash = verify_nash(game, pair, eps=1e-9 * max(1.0, float(abs(game.X).max())))
    E = project_policy(pair.x, enumerate_defender_strategies(spec, None), spec.num_states)
    H = project_policy(pair.y, enumerate_attacker_strategies(spec, None), spec.num_techniques)
    values = policy_values(E, H, spec)
    mode = "discounted" if attacker_payoff == "discounted" else "myopic"
    cert = deviation_certificate(E, H, spec, eps=eps, attacker_mode=mode)
    return Solution(spec, label, game, pair, nash, E, H, values, cert)
