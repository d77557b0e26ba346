import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtdgame import CostModel, GameError, GameSpec, StationaryPolicy, policy_values, uniform_policy
from mtdgame import _kernels_py, kernels
from mtdgame.game import stage_tables
from mtdgame.sim import (
    EpisodeStream,
    empirical_switch_rate,
    sim_horizon,
    simulate,
    simulate_episode,
    simulate_states,
)
from mtdgame.strategies import cost_table, eval_horizon

SPEC = GameSpec()
COSTLY = SPEC.replace(cost_model=CostModel("log", 1.0))

try:
    from mtdgame import _kernels as compiled
except ImportError:  # pure-Python install
    compiled = None


def random_policy(seed, actions, K=4):
    return StationaryPolicy(np.random.default_rng(seed).dirichlet(np.ones(actions), K).T)


E_RAND, H_RAND = random_policy(1, 4), random_policy(2, 2)


def test_stream_matches_vectorised_draws():
    keys = _kernels_py.stream_keys(42, 3)
    scalar = [EpisodeStream(42, e) for e in range(3)]
    for _ in range(5):
        values = _kernels_py._draw(keys)
        assert values.tolist() == [s.uniform() for s in scalar]


def test_uniform_draws_in_unit_interval():
    stream = EpisodeStream(7, 0)
    draws = [stream.uniform() for _ in range(10_000)]
    assert 0 <= min(draws) and max(draws) < 1
    assert abs(np.mean(draws) - 0.5) < 0.01


def test_same_seed_same_result():
    a = simulate(E_RAND, H_RAND, 0, 40, 500, 3, SPEC)
    b = simulate(E_RAND, H_RAND, 0, 40, 500, 3, SPEC)
    c = simulate(E_RAND, H_RAND, 0, 40, 500, 4, SPEC)
    assert a.mean_defender == b.mean_defender and a.switches == b.switches
    assert a.mean_defender != c.mean_defender


@pytest.mark.skipif(compiled is None, reason="compiled kernels not built")
@pytest.mark.parametrize("spec", [SPEC, COSTLY])
def test_backends_bit_identical(spec):
    t = stage_tables(spec)
    args = (
        np.cumsum(E_RAND.probs, 0),
        np.cumsum(H_RAND.probs, 0),
        t.defender,
        t.attacker,
        cost_table(spec, 50),
        2,
        50,
        spec.discount,
        99,
        3000,
    )
    fast, slow = compiled.simulate(*args), _kernels_py.simulate(*args)
    for x, y in zip(fast[:5], slow[:5]):
        assert np.array_equal(x, y)
    assert fast[5] == slow[5]
    F = np.array([[1, 2, 3, 0], [0, 1, 2, 3], [3, 3, 3, 0]])
    ct = cost_table(spec, 200)
    assert np.array_equal(compiled.trajectory_cost_sums(F, ct, 0.9), _kernels_py.trajectory_cost_sums(F, ct, 0.9))


def test_backend_is_selected():
    assert kernels.BACKEND in ("cython", "python")


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**40), episode=st.integers(0, 50), start=st.integers(0, 3))
def test_replay_matches_kernel(seed, episode, start):
    rec = simulate_episode(E_RAND, H_RAND, start, 30, seed, episode, COSTLY)
    # the last episode of the batch is the replayed one
    t = stage_tables(COSTLY)
    ret1, *_ = kernels.simulate(
        np.cumsum(E_RAND.probs, 0), np.cumsum(H_RAND.probs, 0), t.defender, t.attacker,
        cost_table(COSTLY, 30), start, 30, 0.75, seed, episode + 1,
    )
    assert ret1[episode] == rec.discounted_return_defender
    assert [s.state for s in rec.steps[1:]] == [s.defender_action for s in rec.steps[:-1]]


def test_monte_carlo_matches_policy_values():
    T = eval_horizon(SPEC, 1e-9)
    exact = policy_values(E_RAND, H_RAND, SPEC)
    for s in range(4):
        est = simulate(E_RAND, H_RAND, s, T, 20_000, 5, SPEC)
        assert abs(est.mean_defender - exact.defender[s]) <= 4 * est.se_defender
        assert abs(est.mean_attacker - exact.attacker[s]) <= 4 * est.se_attacker


def test_monte_carlo_with_cost():
    T = eval_horizon(COSTLY, 1e-9)
    exact = policy_values(E_RAND, H_RAND, COSTLY).defender
    est = simulate(E_RAND, H_RAND, 1, T, 20_000, 6, COSTLY)
    assert abs(est.mean_defender - exact[1]) <= 4 * est.se_defender
    free = simulate(E_RAND, H_RAND, 1, T, 20_000, 6, SPEC)
    assert est.mean_defender < free.mean_defender


def test_action_frequencies_converge():
    est = simulate(E_RAND, H_RAND, 0, 100, 2000, 8, SPEC)
    visited = est.visit_distribution > 0.05
    assert np.abs(est.defender_action_freq[:, visited] - E_RAND.probs[:, visited]).max() < 0.02
    assert np.abs(est.attacker_action_freq[:, visited] - H_RAND.probs[:, visited]).max() < 0.02
    assert est.visit_distribution.sum() == pytest.approx(1.0)


def test_switch_rates(default_solution):
    E, H = default_solution.defender_policy, default_solution.attacker_policy
    summary = simulate(E, H, 0, 50, 10, 1, SPEC)
    assert empirical_switch_rate(summary) == 1.0
    stay = StationaryPolicy(np.eye(4))
    assert empirical_switch_rate(simulate(stay, H, 2, 50, 10, 1, SPEC)) == 0.0
    uni = simulate(uniform_policy(4, 4), H, 0, 50, 2000, 1, SPEC)
    assert abs(empirical_switch_rate(uni) - 0.75) < 0.01


def test_pure_equilibrium_has_no_spread(default_solution):
    sol = default_solution
    runs = simulate_states(sol.defender_policy, sol.attacker_policy, sim_horizon(SPEC), 50, 2, SPEC)
    for s, r in enumerate(runs):
        assert r.se_defender < 1e-12
        assert abs(r.mean_defender - sol.values.defender[s]) < 1e-3


def test_bad_arguments():
    with pytest.raises(GameError):
        simulate(E_RAND, H_RAND, 0, 0, 10, 1, SPEC)
    with pytest.raises(GameError):
        simulate(E_RAND, H_RAND, 7, 10, 10, 1, SPEC)
    with pytest.raises(GameError):
        simulate(H_RAND, E_RAND, 0, 10, 10, 1, SPEC)


def test_point_mass_episodes_identical():
    f, g = (2, 3, 1, 0), (0, 0, 1, 1)
    E = StationaryPolicy(np.eye(4)[:, list(f)])
    H = StationaryPolicy(np.eye(2)[:, list(g)])
    T = 30
    summary = simulate(E, H, 0, T, 25, 3, SPEC)
    assert summary.se_defender == 0 and summary.se_attacker == 0
    # the truncated pure trajectory, summed in the same order
    t = stage_tables(SPEC)
    total, disc, s = 0.0, 1.0, 0
    for _ in range(T):
        total += disc * t.defender[s, f[s], g[s]]
        s, disc = f[s], disc * SPEC.discount
    assert summary.mean_defender == total
    one = simulate(E, H, 0, T, 1, 3, SPEC)
    assert one.mean_defender == total and one.se_defender == 0


def test_same_seed_identical_summary():
    a = simulate(E_RAND, H_RAND, 1, 40, 300, 11, COSTLY)
    b = simulate(E_RAND, H_RAND, 1, 40, 300, 11, COSTLY)
    for field in a.__dataclass_fields__:
        x, y = getattr(a, field), getattr(b, field)
        assert np.array_equal(x, y), field


def test_episode_record_invariants():
    rec = simulate_episode(E_RAND, H_RAND, 0, 25, 5, 2, COSTLY)
    steps = rec.steps
    for prev, nxt in zip(steps, steps[1:]):
        assert nxt.state == prev.defender_action
        expect_n = 0 if prev.defender_action == prev.state else prev.n + 1
        assert nxt.n == expect_n
    disc = [0.75**k for k in range(len(steps))]
    assert abs(rec.discounted_return_defender - sum(d * s.defender_utility for d, s in zip(disc, steps))) < 1e-12
    assert abs(rec.discounted_return_attacker - sum(d * s.attacker_utility for d, s in zip(disc, steps))) < 1e-12


def test_listed_switch_rates():
    H = uniform_policy(2, 4)
    assert empirical_switch_rate(simulate(StationaryPolicy(np.eye(4)), H, 0, 20, 5, 1, SPEC)) == 0.0
    rotate = StationaryPolicy(np.eye(4)[:, [1, 2, 3, 0]])
    assert empirical_switch_rate(simulate(rotate, H, 0, 20, 5, 1, SPEC)) == 1.0
