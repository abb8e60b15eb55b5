#!/usr/bin/env python3
"""Benchmark the numba-compiled kernels against the pure-numpy fallback.

The fallback is the exact same source (``randlanczos.kernels._core``)
without ``njit``.  Representative sizes match the bundled experiment
configs.  Run:

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import time

import numpy as np

from randlanczos import kernels
from randlanczos.kernels import _core
from randlanczos.randomness import derive_rng, gaussians, sample_sphere


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_tridiag(backend, repeat):
    rng = derive_rng(1, 0, "bench")
    k = 64
    alpha = gaussians(rng, k)
    beta = np.abs(gaussians(rng, k)) + 0.1

    def job():
        for _ in range(20):
            d = alpha.copy()
            e = np.zeros(k)
            e[: k - 1] = beta[: k - 1]
            z = np.eye(k)
            backend["tridiag_ql"](d, e, z, 1e-14 * 4.0, 50, True)

    return timeit(job, repeat)


def bench_stieltjes(backend, repeat):
    rng = derive_rng(2, 0, "bench")
    n, k = 4096, 20
    lam = np.sort(rng.random(n))
    u = sample_sphere(n, rng)
    w = u * u

    def job():
        for _ in range(10):
            alpha = np.zeros(k)
            beta = np.zeros(k)
            ptable = np.zeros((n, k))
            backend["stieltjes_fill"](lam, w, alpha, beta, ptable, 1e-12)

    return timeit(job, repeat)


def bench_lanczos_dense(backend, repeat):
    n, k = 1000, 22
    rng = derive_rng(3, 0, "bench")
    z = gaussians(rng, n * (n + 1) // 2)
    a = np.zeros((n, n))
    iu = np.triu_indices(n)
    a[iu] = z
    a = a + np.triu(a, 1).T
    a /= math.sqrt(n)
    u = sample_sphere(n, rng)

    def job():
        for _ in range(5):
            v = np.zeros((k + 1, n))
            alpha = np.zeros(k)
            beta = np.zeros(k)
            resid = np.zeros(k)
            backend["lanczos_dense_fill"](a, u, v, alpha, beta, resid, 1e-12, 2)

    return timeit(job, repeat)


def bench_witness(backend, repeat):
    rng = derive_rng(4, 0, "bench")
    n = 2048
    lams = np.sort(rng.random(n))
    base = np.log(np.abs(lams - 0.5))
    cands = rng.random(256)

    def job():
        for _ in range(5):
            backend["witness_coord_scan"](lams, base, 2.0, cands, math.log(0.03))

    return timeit(job, repeat)


BENCHES = {
    "tridiag_ql (k=64 x20)": bench_tridiag,
    "stieltjes (n=4096,k=20 x10)": bench_stieltjes,
    "lanczos dense (n=1000,k=22 x5)": bench_lanczos_dense,
    "witness scan (n=2048,256 cands x5)": bench_witness,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    numpy_backend = {name: getattr(_core, name) for name in kernels._KERNEL_NAMES}
    backends = [("numpy", numpy_backend)]
    if kernels.BACKEND == "numba":
        jit_backend = {name: getattr(kernels, name) for name in kernels._KERNEL_NAMES}
        backends.append(("numba", jit_backend))
        # trigger compilation outside the timed region
        for name, fn in BENCHES.items():
            fn(jit_backend, 1)
    else:
        print("numba backend unavailable (RANDLANCZOS_NO_NUMBA set or numba missing)")

    results = {}
    for bname, backend in backends:
        for name, fn in BENCHES.items():
            results[(bname, name)] = fn(backend, args.repeat)

    width = max(len(n) for n in BENCHES)
    header = f"{'kernel':<{width}}  {'numpy':>10}"
    if len(backends) == 2:
        header += f"  {'numba':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name in BENCHES:
        row = f"{name:<{width}}  {results[('numpy', name)] * 1e3:>8.2f}ms"
        if len(backends) == 2:
            t_numba = results[("numba", name)]
            row += f"  {t_numba * 1e3:>8.2f}ms  {results[('numpy', name)] / t_numba:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
