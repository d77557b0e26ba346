# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Mirrors ``_kernels_py`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double _draw(uint64_t* state) nogil:
    state[0] += GOLDEN
    return <double>(_mix(state[0]) >> 11) * INV_2_53


cdef inline int64_t _sample(const double[:, ::1] cdf, int64_t column, double u) nogil:
    cdef int64_t i, picks = 0
    cdef int64_t rows = cdf.shape[0]
    for i in range(rows):
        if u >= cdf[i, column]:
            picks += 1
    if picks > rows - 1:
        picks = rows - 1
    return picks


def trajectory_cost_sums(succ_in, const double[::1] cost_table, double beta):
    cdef const int64_t[:, ::1] succ = np.ascontiguousarray(succ_in, dtype=np.int64)
    cdef Py_ssize_t rows = succ.shape[0], K = succ.shape[1]
    cdef Py_ssize_t horizon = cost_table.shape[0]
    out_arr = np.zeros((rows, K))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, s, t
    cdef int64_t state, nxt, n
    cdef double disc, acc
    with nogil:
        for r in range(rows):
            for s in range(K):
                state = s
                n = 0
                disc = 1.0
                acc = 0.0
                for t in range(horizon):
                    acc = acc + disc * cost_table[n]
                    nxt = succ[r, state]
                    if nxt == state:
                        n = 0
                    else:
                        n = n + 1
                    state = nxt
                    disc = disc * beta
                out[r, s] = acc
    return out_arr


def simulate(e_cdf_in, h_cdf_in, u1_in, u2_in, const double[::1] cost_table,
             int64_t start, Py_ssize_t horizon, double beta, seed, Py_ssize_t episodes):
    cdef const double[:, ::1] e_cdf = np.ascontiguousarray(e_cdf_in, dtype=np.float64)
    cdef const double[:, ::1] h_cdf = np.ascontiguousarray(h_cdf_in, dtype=np.float64)
    cdef const double[:, :, ::1] u1 = np.ascontiguousarray(u1_in, dtype=np.float64)
    cdef const double[:, :, ::1] u2 = np.ascontiguousarray(u2_in, dtype=np.float64)
    cdef Py_ssize_t K = u1.shape[0], N = u1.shape[2]
    ret1_arr = np.zeros(episodes)
    ret2_arr = np.zeros(episodes)
    visits_arr = np.zeros(K, dtype=np.int64)
    def_arr = np.zeros((K, K), dtype=np.int64)
    att_arr = np.zeros((N, K), dtype=np.int64)
    cdef double[::1] ret1 = ret1_arr
    cdef double[::1] ret2 = ret2_arr
    cdef int64_t[::1] visits = visits_arr
    cdef int64_t[:, ::1] def_counts = def_arr
    cdef int64_t[:, ::1] att_counts = att_arr
    cdef uint64_t base = (<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)) * GOLDEN
    cdef uint64_t rng
    cdef Py_ssize_t e, t
    cdef int64_t state, n, a1, a2, switches = 0
    cdef double disc, r1, r2, ua, ub
    with nogil:
        for e in range(episodes):
            rng = _mix(base ^ <uint64_t>e)
            state = start
            n = 0
            disc = 1.0
            r1 = 0.0
            r2 = 0.0
            for t in range(horizon):
                ua = _draw(&rng)
                ub = _draw(&rng)
                a1 = _sample(e_cdf, state, ua)
                a2 = _sample(h_cdf, state, ub)
                r1 = r1 + disc * (u1[state, a1, a2] - cost_table[n])
                r2 = r2 + disc * u2[state, a1, a2]
                visits[state] += 1
                def_counts[a1, state] += 1
                att_counts[a2, state] += 1
                if a1 != state:
                    switches += 1
                    n = n + 1
                else:
                    n = 0
                state = a1
                disc = disc * beta
            ret1[e] = r1
            ret2[e] = r2
    return ret1_arr, ret2_arr, visits_arr, def_arr, att_arr, int(switches)
