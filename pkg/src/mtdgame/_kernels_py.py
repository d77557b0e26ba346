"""Pure-numpy versions of the hot loops in ``_kernels.pyx``.

Both implementations perform the same IEEE operations in the same order,
so results are bit-identical. Random draws come from SplitMix64, one
stream per episode keyed by ``(seed, episode)``.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
INV_2_53 = 1.0 / 9007199254740992.0


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed, episodes):
    with np.errstate(over="ignore"):
        ep = np.arange(episodes, dtype=np.uint64)
        return _mix((np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * GOLDEN) ^ ep)


def _draw(state):
    with np.errstate(over="ignore"):
        state += GOLDEN
        z = _mix(state)
    return (z >> np.uint64(11)).astype(np.float64) * INV_2_53


def _sample(cdf, column, u):
    # first index whose cumulative mass exceeds u
    picks = (u[:, None] >= cdf[:, column].T).sum(axis=1)
    return np.minimum(picks, cdf.shape[0] - 1)


def trajectory_cost_sums(succ, cost_table, beta):
    """``out[f, s] = sum_t beta**t * cost_table[n_t]`` along strategy ``f`` from ``s``."""
    succ = np.asarray(succ, dtype=np.int64)
    rows, K = succ.shape
    horizon = cost_table.shape[0]
    state = np.tile(np.arange(K, dtype=np.int64), (rows, 1))
    n = np.zeros((rows, K), dtype=np.int64)
    out = np.zeros((rows, K))
    disc = 1.0
    ridx = np.arange(rows)[:, None]
    for _ in range(horizon):
        out += disc * cost_table[n]
        nxt = succ[ridx, state]
        n = np.where(nxt == state, 0, n + 1)
        state = nxt
        disc *= beta
    return out


def simulate(e_cdf, h_cdf, u1, u2, cost_table, start, horizon, beta, seed, episodes):
    K = u1.shape[0]
    N = u1.shape[2]
    rng = stream_keys(seed, episodes)
    state = np.full(episodes, start, dtype=np.int64)
    n = np.zeros(episodes, dtype=np.int64)
    ret1 = np.zeros(episodes)
    ret2 = np.zeros(episodes)
    visits = np.zeros(K, dtype=np.int64)
    def_counts = np.zeros((K, K), dtype=np.int64)
    att_counts = np.zeros((N, K), dtype=np.int64)
    switches = 0
    disc = 1.0
    for _ in range(horizon):
        a1 = _sample(e_cdf, state, _draw(rng))
        a2 = _sample(h_cdf, state, _draw(rng))
        ret1 += disc * (u1[state, a1, a2] - cost_table[n])
        ret2 += disc * u2[state, a1, a2]
        np.add.at(visits, state, 1)
        np.add.at(def_counts, (a1, state), 1)
        np.add.at(att_counts, (a2, state), 1)
        moved = a1 != state
        switches += int(moved.sum())
        n = np.where(moved, n + 1, 0)
        state = a1
        disc *= beta
    return ret1, ret2, visits, def_counts, att_counts, switches
