#!/usr/bin/env python3
"""Benchmark the jitted rate kernels against the pure-Python fallback.

Two views:

* kernel microbenchmark: `rate_parts` called the way the optimizer's
  objective/constraint wrappers call it (one scalar evaluation per call),
  jitted vs `.py_func`;
* end to end: one multi-start `optimize()` per scheme, this process vs a
  subprocess with SELFBACKHAUL_NO_NUMBA=1.

Run:  python benchmarks/bench_kernels.py [--evals 200000] [--starts 20]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from selfbackhaul import _kernels
from selfbackhaul.model import Scheme, params_from_db
from selfbackhaul.optimizer import OptimizerOptions, optimize

CELL = dict(n_t=200, n_r=100, m_bh_t=6, m_bh_r=12, d=10, u=10,
            k_d2d=0, k_an=0, noise_dbm=-90, l_ue_db=80, l_ud_db=70,
            l_bh_db=80, p_an_dbm=30, p_ue_dbm=25, p_bh_dbm=40,
            si_cancellation_db=120, rho_min=0.15, rho_max=0.30)


def bench_kernel(evals):
    params = params_from_db(CELL)
    kargs = params.kernel_args()
    rng = np.random.default_rng(0)
    points = rng.uniform(0.0, 300.0, size=(evals, 6))
    points[:, 5] = rng.uniform(0.0, 1.0, size=evals)

    variants = [("numba" if _kernels.NUMBA_ENABLED else "python",
                 _kernels.rate_parts)]
    if _kernels.NUMBA_ENABLED:
        variants.append(("python", _kernels.rate_parts.py_func))

    results = {}
    for name, fn in variants:
        fn(1, *kargs, *points[0])          # warm up / compile
        acc = 0.0
        start = time.perf_counter()
        for row in points:
            acc += fn(1, *kargs, row[0], row[1], row[2], row[3],
                      row[4], row[5])[0]
        elapsed = time.perf_counter() - start
        results[name] = elapsed
        print(f"  rate_parts [{name:>6s}]: {elapsed:.3f}s "
              f"({1e6 * elapsed / evals:.2f} us/eval, checksum {acc:.3e})")
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['numba']:.2f}x")


def bench_optimize(starts):
    params = params_from_db(CELL)
    opts = OptimizerOptions(n_starts=starts, rng_seed=42)
    total = 0.0
    for scheme in Scheme:
        start = time.perf_counter()
        result = optimize(scheme, params, opts)
        elapsed = time.perf_counter() - start
        total += elapsed
        print(f"  optimize {scheme.value}: {elapsed:.2f}s "
              f"(c_s={result.best_rates.c_s:.4f})")
    label = "numba" if _kernels.NUMBA_ENABLED else "python"
    print(f"  [{label}] total {total:.2f}s for 3 schemes x {starts} starts")
    return total


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--evals", type=int, default=200000)
    parser.add_argument("--starts", type=int, default=20)
    parser.add_argument("--inner", action="store_true",
                        help="(internal) fallback subprocess mode")
    args = parser.parse_args()

    if args.inner:
        bench_optimize(args.starts)
        return

    print(f"numba enabled: {_kernels.NUMBA_ENABLED}")
    print(f"kernel microbenchmark ({args.evals} evaluations):")
    bench_kernel(args.evals)

    print(f"end to end ({args.starts} starts per scheme):")
    bench_optimize(args.starts)
    if _kernels.NUMBA_ENABLED:
        print("same, pure-python fallback subprocess:")
        env = dict(os.environ, SELFBACKHAUL_NO_NUMBA="1")
        subprocess.run([sys.executable, __file__, "--inner",
                        "--starts", str(args.starts)], env=env, check=True)


if __name__ == "__main__":
    main()
