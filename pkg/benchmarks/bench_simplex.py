#!/usr/bin/env python3
"""Benchmark the simplex pivot kernels: compiled extension vs numpy fallback.

The pivot loop dominates solver runtime (every cutting-plane iteration
re-solves a master LP), so this compares both kernels on master-shaped LPs
of growing size and on one end-to-end penalty solve.

Usage: python benchmarks/bench_simplex.py [--repeat N]
"""

import argparse
import time

import numpy as np

from coneccp import _simplex_py, lp

try:
    from coneccp import _simplex_cy
except ImportError:
    _simplex_cy = None


def master_like_lp(rng, n_cuts, d):
    """An LP shaped like a cutting-plane master: epigraph variable + cuts."""
    points = rng.uniform(-1.0, 1.0, (n_cuts, d))
    grads = rng.normal(size=(n_cuts, d))
    vals = np.sum(points ** 2, axis=1)
    A = np.hstack([grads, -np.ones((n_cuts, 1))])
    b = np.einsum("ij,ij->i", grads, points) - vals
    c = np.concatenate([np.zeros(d), [1.0]])
    lo = np.concatenate([-np.ones(d), [-np.inf]])
    hi = np.concatenate([np.ones(d), [np.inf]])
    return c, A, b, lo, hi


def time_kernel(kernel, problems, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for c, A, b, lo, hi in problems:
            res = lp.solve_lp(c, A, b, lo, hi, kernel=kernel)
            assert res.status == lp.OPTIMAL
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lps(repeat):
    rng = np.random.default_rng(0)
    print(f"{'cuts':>6} {'dim':>4} {'python':>10} {'cython':>10} {'speedup':>8}")
    for n_cuts, d in ((20, 3), (60, 3), (120, 5), (250, 5), (400, 8)):
        problems = [master_like_lp(rng, n_cuts, d) for _ in range(10)]
        t_py = time_kernel(_simplex_py, problems, repeat)
        if _simplex_cy is None:
            print(f"{n_cuts:>6} {d:>4} {t_py * 100:>9.2f}ms {'n/a':>10}")
            continue
        t_cy = time_kernel(_simplex_cy, problems, repeat)
        print(f"{n_cuts:>6} {d:>4} {t_py * 100:>9.2f}ms {t_cy * 100:>9.2f}ms "
              f"{t_py / t_cy:>7.1f}x")


def bench_end_to_end(repeat):
    from coneccp.ccp import CcpConfig, run_ccp
    from coneccp.library import quadratic_sdp

    problem = quadratic_sdp(7, validate=False)
    x0 = problem.known_facts["strictly_feasible_point"]
    kernels = [("python", _simplex_py)]
    if _simplex_cy is not None:
        kernels.append(("cython", _simplex_cy))
    print("\nend-to-end CCP solve (quadratic matrix inequality, d=2):")
    saved = lp._kernel
    try:
        for name, kernel in kernels:
            lp._kernel = kernel
            best = np.inf
            for _ in range(repeat):
                t0 = time.perf_counter()
                run_ccp(problem, x0, CcpConfig(max_iter=25))
                best = min(best, time.perf_counter() - t0)
            print(f"  {name:>7}: {best * 1000:.1f} ms")
    finally:
        lp._kernel = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"active backend at import: {lp.KERNEL_BACKEND}")
    if _simplex_cy is None:
        print("compiled kernel not available; timing the fallback only")
    bench_lps(args.repeat)
    bench_end_to_end(args.repeat)


if __name__ == "__main__":
    main()
