"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --episodes 100000 --repeat 3
"""
import argparse
import itertools
import time

import numpy as np

from mtdgame import CostModel, GameSpec
from mtdgame import _kernels_py
from mtdgame.game import stage_tables
from mtdgame.strategies import cost_table

try:
    from mtdgame import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=100_000)
    parser.add_argument("--horizon", type=int, default=60)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    spec = GameSpec(cost_model=CostModel("log", 1.0))
    t = stage_tables(spec)
    rng = np.random.default_rng(0)
    e_cdf = np.cumsum(rng.dirichlet(np.ones(4), 4).T, axis=0)
    h_cdf = np.cumsum(rng.dirichlet(np.ones(2), 4).T, axis=0)
    sim_args = (e_cdf, h_cdf, t.defender, t.attacker, cost_table(spec, args.horizon),
                0, args.horizon, spec.discount, 42, args.episodes)
    F = np.array(list(itertools.product(range(4), repeat=4)))
    traj_args = (F, cost_table(spec, 500), 0.9)

    backends = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    results = {}
    print(f"{'kernel':<22}{'backend':<10}{'seconds':>10}")
    for kernel, fn_args in (("simulate", sim_args), ("trajectory_cost_sums", traj_args)):
        for name, mod in backends:
            secs, out = best_of(lambda: getattr(mod, kernel)(*fn_args), args.repeat)
            results[kernel, name] = out
            print(f"{kernel:<22}{name:<10}{secs:>10.4f}")
    if compiled:
        same = all(np.array_equal(a, b) for a, b in zip(results["simulate", "python"][:5],
                                                       results["simulate", "cython"][:5]))
        same &= np.array_equal(results["trajectory_cost_sums", "python"],
                               results["trajectory_cost_sums", "cython"])
        print(f"outputs bit-identical: {same}")
    else:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
