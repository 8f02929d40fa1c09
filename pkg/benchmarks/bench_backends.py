"""Benchmark the numba kernels against the pure-numpy fallback.

Runs both implementations of each hot kernel on identical inputs and
prints wall times plus the agreement between the results.

    python3 benchmarks/bench_backends.py
"""

import time

import numpy as np

from hullscope import _kernels_numba, _kernels_numpy
from hullscope.polyclass import multi_index_basis


def timed(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_projection(name, n, d, n_queries, seed):
    rng = np.random.default_rng(seed)
    P = np.ascontiguousarray(rng.standard_normal((n, d)))
    Q = np.ascontiguousarray(rng.standard_normal((n_queries, d)) * 1.5)

    def run_all(kern):
        dists = np.empty(n_queries)
        for i in range(n_queries):
            lam, _, _, _ = kern.fw_project(P, Q[i], 1e-10, 50 * n)
            dists[i] = np.linalg.norm(P.T @ lam - Q[i])
        return dists

    # trigger jit compilation outside the timed region
    _kernels_numba.fw_project(P, Q[0], 1e-10, 50 * n)

    t_np, d_np = timed(run_all, _kernels_numpy)
    t_nb, d_nb = timed(run_all, _kernels_numba)
    agree = float(np.max(np.abs(d_np - d_nb)))
    print(f"fw_project {name:22s} numpy {t_np*1e3:9.1f} ms   "
          f"numba {t_nb*1e3:9.1f} ms   speedup {t_np/t_nb:5.1f}x   "
          f"max |d_np - d_nb| {agree:.2e}")


def bench_design(name, n_points, dim, degree, seed):
    rng = np.random.default_rng(seed)
    T = np.ascontiguousarray(rng.uniform(-1, 1, size=(n_points, dim)))
    exps = multi_index_basis(dim, degree)
    _kernels_numba.monomial_design(T, exps)

    t_np, v_np = timed(_kernels_numpy.monomial_design, T, exps)
    t_nb, v_nb = timed(_kernels_numba.monomial_design, T, exps)
    agree = float(np.max(np.abs(v_np - v_nb)))
    print(f"monomial_design {name:17s} numpy {t_np*1e3:9.1f} ms   "
          f"numba {t_nb*1e3:9.1f} ms   speedup {t_np/t_nb:5.1f}x   "
          f"max |V_np - V_nb| {agree:.2e}")


def main():
    print("hot-kernel backends, best of 3 runs\n")
    bench_projection("small (n=8, d=4)", 8, 4, 500, seed=0)
    bench_projection("medium (n=60, d=8)", 60, 8, 200, seed=1)
    bench_projection("high-d (n=200, d=64)", 200, 64, 100, seed=2)
    print()
    bench_design("(1e4 pts, d=2, deg 6)", 10_000, 2, 6, seed=3)
    bench_design("(4096 pts, d=3, deg 8)", 4096, 3, 8, seed=4)


if __name__ == "__main__":
    main()
