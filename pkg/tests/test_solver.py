from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtdgame import BimatrixGame, MixedStrategyPair, lemke_howson, support_enumeration, verify_nash
from mtdgame.solver import lemke_howson_all_labels, matches_any


def G(X, Y):
    return BimatrixGame.from_arrays(X, Y)


PD = G([[3, 0], [5, 1]], [[3, 5], [0, 1]])
PENNIES = G([[1, -1], [-1, 1]], [[-1, 1], [1, -1]])
BOS = G([[2, 0], [0, 1]], [[1, 0], [0, 2]])


def test_prisoners_dilemma():
    pair = lemke_howson(PD)
    assert pair.x == (0, 1) and pair.y == (0, 1)


def test_matching_pennies_exact_half():
    pair = lemke_howson(PENNIES)
    assert pair.x == (Fraction(1, 2), Fraction(1, 2))
    assert pair.y == (Fraction(1, 2), Fraction(1, 2))
    for v in pair.x + pair.y:
        assert isinstance(v, Fraction)


def test_battle_of_the_sexes_all_labels():
    found = lemke_howson_all_labels(BOS)
    expected = [
        MixedStrategyPair((1, 0), (1, 0)),
        MixedStrategyPair((0, 1), (0, 1)),
        MixedStrategyPair((Fraction(2, 3), Fraction(1, 3)), (Fraction(1, 3), Fraction(2, 3))),
    ]
    for pair in found:
        assert matches_any(pair, expected, tol=0)
    assert len(support_enumeration(BOS)) == 3


def test_shift_invariance():
    rng = np.random.default_rng(3)
    X, Y = rng.integers(-5, 5, (3, 4)), rng.integers(-5, 5, (3, 4))
    base = lemke_howson(G(X, Y))
    shifted = lemke_howson(G(X + 100, Y - 40))
    assert base == shifted


def test_random_games_match_support_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(50):
        X, Y = rng.integers(-9, 10, (3, 3)), rng.integers(-9, 10, (3, 3))
        game = G(X, Y)
        oracle = support_enumeration(game)
        pair = lemke_howson(game)
        assert verify_nash(game, pair, 1e-9)
        assert matches_any(pair, oracle, 1e-6)


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 4),
    n=st.integers(1, 4),
    seed=st.integers(0, 2**32 - 1),
)
def test_every_label_reaches_an_equilibrium(m, n, seed):
    rng = np.random.default_rng(seed)
    game = G(rng.normal(size=(m, n)), rng.normal(size=(m, n)))
    for label in range(1, m + n + 1):
        pair = lemke_howson(game, label)
        assert sum(pair.x) == 1 and sum(pair.y) == 1
        assert min(pair.x) >= 0 and min(pair.y) >= 0
        assert verify_nash(game, pair, 1e-9)


def test_degenerate_duplicated_rows():
    game = G([[1, 2], [1, 2], [0, 3]], [[2, 1], [2, 1], [1, 1]])
    for label in range(1, 6):
        assert verify_nash(game, lemke_howson(game, label), 1e-12)
    assert support_enumeration(game)


def test_degenerate_constant_game():
    game = G(np.zeros((3, 3)), np.zeros((3, 3)))
    pair = lemke_howson(game)
    assert verify_nash(game, pair, 0)


def test_verify_nash_regret():
    report = verify_nash(PD, MixedStrategyPair((1, 0), (1, 0)))
    assert not report
    assert report.row_regret == 2 and report.col_regret == 2
    uniform = MixedStrategyPair((0.5, 0.5), (0.5, 0.5))
    assert not verify_nash(PD, uniform)
    with pytest.raises(ValueError):
        verify_nash(PD, MixedStrategyPair((1,), (1, 0)))


def test_bad_label_and_size_limit():
    with pytest.raises(ValueError):
        lemke_howson(PD, initial_label=5)
    with pytest.raises(ValueError):
        support_enumeration(G(np.zeros((9, 2)), np.zeros((9, 2))))


def test_default_game_equilibrium(default_solution):
    sol = default_solution
    assert sol.game.shape == (256, 16)
    assert verify_nash(sol.game, sol.pair, 0)
    assert sum(sol.pair.x) == 1 and sum(sol.pair.y) == 1
