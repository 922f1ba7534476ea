"""Time the numba and numpy kernel backends on the solver's hot loops.

Both backends run the same algorithm, so the Blahut-Arimoto runs below must
agree; the script checks that before printing timings.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from poissoncap import kernels
from poissoncap.bounds_upper import input_grid
from poissoncap.special_fn import truncation_point

CASES = [
    # (label, dark current, grid cap, multiplier, BA gap target, evaluations)
    ("lam=1 A=1   s=0.38", 1.0, 1.0, 0.3846, 1e-12, 20_000),
    ("lam=1 A=inf s=1.32", 1.0, 41.4, 1.3212, 1e-9, 20_000),
    ("lam=0 A=10  s=1.10", 0.0, 10.0, 1.1045, 1e-9, 20_000),
]


def _best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--grid-size", type=int, default=200)
    args = ap.parse_args()

    impls = kernels.backends()
    if "numba" not in impls:
        print("numba is not importable; only the numpy backend is timed")
    names = sorted(impls)

    # compile once outside the timed region
    for name in names:
        m = impls[name]
        levels = np.linspace(0.0, 1.0, 4)
        logW = m.log_pmf_matrix(levels, 8)
        m.ba_solve(np.exp(logW), logW, levels, 1.0, np.full(4, 0.25), 1e-6, 50)

    print(f"{'case':22s} {'backend':8s} {'evals':>7s} {'gap':>10s} {'seconds':>9s} {'us/eval':>8s}")
    for label, lam, top, s, tol, max_iter in CASES:
        xs = input_grid(top, args.grid_size)
        n_y = truncation_point(lam + top, 1e-15) + 1
        r0 = np.full(xs.size, 1.0 / xs.size)
        results = {}
        for name in names:
            m = impls[name]
            logW = m.log_pmf_matrix(lam + xs, n_y)
            W = np.exp(logW)
            secs, out = _best_of(lambda: m.ba_solve(W, logW, xs, s, r0, tol, max_iter), args.repeat)
            r, D, gap, evals, _ = out
            results[name] = (r, gap)
            print(f"{label:22s} {name:8s} {evals:7d} {gap:10.2e} {secs:9.3f} {1e6 * secs / evals:8.1f}")
        if len(results) == 2:
            diff = np.abs(results["numba"][0] - results["numpy"][0]).max()
            print(f"{'':22s} max |r_numba - r_numpy| = {diff:.1e}")

    xs = np.linspace(0.0, 50.0, 400)
    for name in names:
        m = impls[name]
        secs, _ = _best_of(lambda: m.log_pmf_matrix(xs, 200), args.repeat)
        print(f"{'log_pmf_matrix 400x200':22s} {name:8s} {'':7s} {'':10s} {secs:9.4f}")


if __name__ == "__main__":
    main()
