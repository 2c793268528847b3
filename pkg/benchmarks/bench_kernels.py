"""Timing comparison of the jitted kernels against their numpy fallbacks.

Usage:
    python benchmarks/bench_kernels.py [--repeats 5]

The package selects the kernel path at import time from the
CAUSAL_LRPS_NUMBA environment variable; this script imports both the
plain-python sources and the active (usually jitted) bindings and times
them head to head on representative workloads.
"""

import argparse
import time

import numpy as np

from causal_lrps import _kernels as K
from causal_lrps import rng as rngmod


def timeit(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def admm_workload(p=30, iters=400):
    g = rngmod.stream(1, rngmod.STREAM_TEST)
    a = g.standard_normal((p, 2 * p))
    sigma = a @ a.T / (2 * p)
    s0 = np.diag(1.0 / np.diag(sigma))
    z = np.zeros((p, p))
    return (sigma, 0.05, 0.1, 1.0, iters, 1e-12, 1e-12, 0, 0, 0, 1,
            s0, np.zeros((p, p)), z)


def dsep_workload(p=25):
    g = rngmod.stream(2, rngmod.STREAM_TEST)
    adj = np.zeros((p, p), dtype=np.int8)
    perm = g.permutation(p)
    for i in range(p):
        for j in range(i + 1, p):
            if g.random() < 0.15:
                adj[perm[i], perm[j]] = 1
    blocked = np.zeros(p, dtype=np.bool_)
    blocked[g.integers(0, p, size=3)] = True
    return adj, 0, blocked


def dsep_many(fn, adj, blocked, queries=2000):
    for q in range(queries):
        fn(adj, q % adj.shape[0], blocked)


def meek_workload(p=40):
    g = rngmod.stream(3, rngmod.STREAM_TEST)
    amat = np.zeros((p, p), dtype=np.int8)
    for i in range(p):
        for j in range(i + 1, p):
            r = g.random()
            if r < 0.08:
                amat[i, j] = 1
            elif r < 0.2:
                amat[i, j] = 1
                amat[j, i] = 1
    return amat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rows = []

    if K.USING_NUMBA:
        K.admm_lrps(*admm_workload(p=5, iters=5))  # compile outside the clock
    for p in (10, 30):
        t_fast = timeit(K.admm_lrps, admm_workload(p=p), args.repeats)
        t_py = timeit(K._admm_lrps, admm_workload(p=p), args.repeats)
        rows.append((f"admm_lrps (p={p}, 400 iters)", t_py, t_fast))

    adj, x, blocked = dsep_workload()
    if K.USING_NUMBA:
        K.reachable_from(adj, 0, blocked)
    t_fast = timeit(lambda *a: dsep_many(K.reachable_from, adj, blocked), (), args.repeats)
    # rebind the helper so the fallback timing is pure python end to end
    saved = K.ancestors_mask
    K.ancestors_mask = K._ancestors_mask
    try:
        t_py = timeit(lambda *a: dsep_many(K._reachable_from, adj, blocked), (), args.repeats)
    finally:
        K.ancestors_mask = saved
    rows.append(("reachable_from (p=25, 2000 queries)", t_py, t_fast))

    amat = meek_workload()
    if K.USING_NUMBA:
        K.meek_sweep(amat.copy())
    t_fast = timeit(lambda: K.meek_sweep(amat.copy()), (), args.repeats)
    t_py = timeit(lambda: K._meek_sweep(amat.copy()), (), args.repeats)
    rows.append(("meek_sweep (p=40)", t_py, t_fast))

    path = "numba" if K.USING_NUMBA else "numpy (CAUSAL_LRPS_NUMBA=0)"
    print(f"active path: {path}\n")
    print(f"{'kernel':40s} {'numpy':>10s} {'active':>10s} {'speedup':>9s}")
    for name, t_py, t_fast in rows:
        print(f"{name:40s} {t_py*1e3:9.2f}ms {t_fast*1e3:9.2f}ms "
              f"{t_py/max(t_fast,1e-12):8.1f}x")


if __name__ == "__main__":
    main()
