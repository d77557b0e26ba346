"""Mixed Nash equilibria of bimatrix games.

:func:`lemke_howson` follows the complementary pivoting path on exact
integer tableaux (Bareiss-style integer pivoting), breaking ratio-test ties
lexicographically so degenerate games never stall it.
:func:`support_enumeration` is an independent floating-point oracle for
small games, and :func:`verify_nash` measures regrets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .strategies import BimatrixGame


class PivotingError(RuntimeError):
    """Raised when the pivoting path revisits a basis or runs out of pivots."""


@dataclass(frozen=True)
class MixedStrategyPair:
    x: tuple
    y: tuple

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([float(v) for v in self.x]), np.array([float(v) for v in self.y])


@dataclass(frozen=True)
class NashReport:
    ok: bool
    row_regret: float
    col_regret: float

    def __bool__(self) -> bool:
        return self.ok


def verify_nash(game: BimatrixGame, pair: MixedStrategyPair, eps: float = 1e-9) -> NashReport:
    x, y = pair.arrays()
    if x.shape != (game.shape[0],) or y.shape != (game.shape[1],):
        raise ValueError(
            f"strategy lengths {x.shape[0]}, {y.shape[0]} do not match game shape {game.shape}"
        )
    row_payoffs = game.X @ y
    col_payoffs = x @ game.Y
    row_regret = float(row_payoffs.max() - x @ row_payoffs)
    col_regret = float(col_payoffs.max() - col_payoffs @ y)
    return NashReport(row_regret <= eps and col_regret <= eps, row_regret, col_regret)


def _rational_matrix(game: BimatrixGame, which: str):
    exact_rows = game.X_exact if which == "X" else game.Y_exact
    if exact_rows is not None:
        return [list(r) for r in exact_rows]
    values = game.X if which == "X" else game.Y
    return [[Fraction(float(v)) for v in row] for row in values]


def _integer_payoffs(game: BimatrixGame):
    """Shift both matrices by one constant so every entry is >= 1, then clear denominators."""
    A = _rational_matrix(game, "X")
    B = _rational_matrix(game, "Y")
    low = min(min(min(r) for r in A), min(min(r) for r in B))
    shift = 1 - low
    out = []
    for M in (A, B):
        M = [[v + shift for v in row] for row in M]
        scale = 1
        for row in M:
            for v in row:
                scale = math.lcm(scale, v.denominator)
        out.append(np.array([[int(v * scale) for v in row] for row in M], dtype=object))
    return out


class _Tableau:
    """Integer tableau ``[columns by label | rhs]`` with a shared denominator."""

    def __init__(self, coeffs: np.ndarray, basis: list[int], unit_cols: range):
        rows = coeffs.shape[0]
        self.T = np.concatenate([coeffs, np.ones((rows, 1), dtype=object)], axis=1)
        self.det = 1
        self.basis = basis
        self.unit_cols = unit_cols

    def _lex_min_row(self, col: int) -> int:
        T = self.T
        candidates = [i for i in range(T.shape[0]) if T[i, col] > 0]
        if not candidates:
            raise PivotingError(f"no leaving row for column {col}: polytope is unbounded")
        for k in itertools.chain((T.shape[1] - 1,), self.unit_cols):
            if len(candidates) == 1:
                break
            ratios = [Fraction(T[i, k], T[i, col]) for i in candidates]
            best = min(ratios)
            candidates = [i for i, r in zip(candidates, ratios) if r == best]
        if len(candidates) != 1:
            raise PivotingError("lexicographic ratio test failed to break a tie")
        return candidates[0]

    def pivot(self, label: int) -> int:
        col = label - 1
        row = self._lex_min_row(col)
        T = self.T
        p = T[row, col]
        pivot_row = T[row].copy()
        T = (T * p - np.outer(T[:, col], pivot_row)) // self.det
        T[row] = pivot_row
        self.T = T
        self.det = p
        leaving = self.basis[row]
        self.basis[row] = label
        return leaving

    def values(self, labels: range) -> list[Fraction]:
        out = [Fraction(0)] * len(labels)
        lo = labels.start
        for row, lab in enumerate(self.basis):
            if lab in labels:
                out[lab - lo] = Fraction(self.T[row, -1], self.det)
        return out


def _normalise(v: list[Fraction]) -> tuple[Fraction, ...]:
    total = sum(v)
    if total <= 0:
        raise PivotingError("pivoting ended at the artificial equilibrium")
    return tuple(p / total for p in v)


def lemke_howson(
    game: BimatrixGame, initial_label: int = 1, max_pivots: int | None = None
) -> MixedStrategyPair:
    """One equilibrium reached by dropping ``initial_label`` (1-based).

    Labels ``1..m`` are the row player's pure strategies, ``m+1..m+n`` the
    column player's. Returned probabilities are exact fractions.
    """
    m, n = game.shape
    if not 1 <= initial_label <= m + n:
        raise ValueError(f"initial_label must lie in [1, {m + n}], got {initial_label}")
    A, B = _integer_payoffs(game)
    # r + A y = 1 over rows; labels 1..m are slacks r, m+1..m+n are y
    col_tab = _Tableau(
        np.concatenate([np.eye(m, dtype=int).astype(object), A], axis=1),
        list(range(1, m + 1)),
        range(0, m),
    )
    # B^T x + s = 1 over columns; labels 1..m are x, m+1..m+n are slacks s
    row_tab = _Tableau(
        np.concatenate([B.T, np.eye(n, dtype=int).astype(object)], axis=1),
        list(range(m + 1, m + n + 1)),
        range(m, m + n),
    )
    if max_pivots is None:
        max_pivots = 2 * math.comb(m + n, min(m, n)) + 2
    tab = row_tab if initial_label <= m else col_tab
    entering = initial_label
    seen = set()
    for _ in range(max_pivots):
        leaving = tab.pivot(entering)
        if leaving == initial_label:
            break
        key = (tab is row_tab, tuple(sorted(row_tab.basis)), tuple(sorted(col_tab.basis)))
        if key in seen:
            raise PivotingError("pivoting revisited a basis (cycling)")
        seen.add(key)
        entering = leaving
        tab = col_tab if tab is row_tab else row_tab
    else:
        raise PivotingError(f"no equilibrium after {max_pivots} pivots")
    x = _normalise(row_tab.values(range(1, m + 1)))
    y = _normalise(col_tab.values(range(m + 1, m + n + 1)))
    return MixedStrategyPair(x, y)


def lemke_howson_all_labels(game: BimatrixGame) -> list[MixedStrategyPair]:
    """Distinct equilibria reached from every initial label."""
    found: list[MixedStrategyPair] = []
    for label in range(1, sum(game.shape) + 1):
        pair = lemke_howson(game, label)
        if pair not in found:
            found.append(pair)
    return found


def _indifferent_mixtures(M: np.ndarray, tol: float):
    """Mixtures ``p`` over rows of ``M`` making the columns in some set ``J`` tied best.

    For every support ``I`` and equal-sized column set ``J`` with a
    nonsingular system, solve ``M[I, J]^T p_I = v``, ``sum(p_I) = 1``.
    Yields ``(p, support)`` for nonnegative solutions whose tied columns
    attain the maximum payoff.
    """
    rows, cols = M.shape
    for k in range(1, min(rows, cols) + 1):
        for I in itertools.combinations(range(rows), k):
            for J in itertools.combinations(range(cols), k):
                lhs = np.zeros((k + 1, k + 1))
                lhs[:k, :k] = M[np.ix_(I, J)].T
                lhs[:k, k] = -1.0
                lhs[k, :k] = 1.0
                rhs = np.zeros(k + 1)
                rhs[k] = 1.0
                try:
                    sol = np.linalg.solve(lhs, rhs)
                except np.linalg.LinAlgError:
                    continue
                if np.linalg.cond(lhs) > 1e12:
                    continue
                p_I = sol[:k]
                if (p_I < -tol).any():
                    continue
                p = np.zeros(rows)
                p[list(I)] = np.clip(p_I, 0.0, None)
                p /= p.sum()
                payoff = p @ M
                if payoff[list(J)].min() < payoff.max() - tol:
                    continue
                yield p


def support_enumeration(
    game: BimatrixGame, max_dim: int = 8, tol: float = 1e-9
) -> list[MixedStrategyPair]:
    """Equilibria found by solving indifference systems over supports.

    Each side is enumerated separately: a row mixture is a candidate when it
    makes an equal-sized set of columns tied best responses, and likewise for
    columns. Candidate pairs are kept when they pass :func:`verify_nash`.
    This recovers every extreme equilibrium, degenerate games included.
    """
    m, n = game.shape
    if m > max_dim or n > max_dim:
        raise ValueError(f"support enumeration is limited to {max_dim}x{max_dim}, got {m}x{n}")
    xs = _dedupe(_indifferent_mixtures(game.Y, tol))
    ys = _dedupe(_indifferent_mixtures(game.X.T, tol))
    found = []
    for x in xs:
        for y in ys:
            pair = MixedStrategyPair(tuple(x), tuple(y))
            if verify_nash(game, pair, eps=max(tol, 1e-9) * 10):
                found.append(pair)
    return found


def _dedupe(vectors, decimals: int = 9) -> list[np.ndarray]:
    seen = {}
    for v in vectors:
        seen.setdefault(tuple(np.round(v, decimals)), v)
    return list(seen.values())


def matches_any(pair: MixedStrategyPair, others: Sequence[MixedStrategyPair], tol: float = 1e-6) -> bool:
    x, y = pair.arrays()
    for other in others:
        ox, oy = other.arrays()
        if np.abs(x - ox).max() <= tol and np.abs(y - oy).max() <= tol:
            return True
    return False
