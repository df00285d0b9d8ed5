"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import timeit

import numpy as np

from noregret import _pykernels as py

try:
    from noregret import _kernels as cy
except ImportError:
    cy = None


def cases(rng):
    d = 10
    n = 10_000
    y = rng.normal(size=d)
    Y = rng.normal(size=(2000, d))
    pts = rng.normal(size=(8, 3))
    P = rng.uniform(-1, 1, size=(n, d))
    etas = math.sqrt(2 * math.log(d) / n) * np.ones(n + 1)
    c = np.zeros(d)
    return {
        "logit": lambda k: k.logit(y),
        "project_simplex": lambda k: k.project_simplex(y),
        "project_simplex_rows(2000x10)": lambda k: k.project_simplex_rows(Y),
        "badoiu_clarkson(10^4 iters)": lambda k: k.badoiu_clarkson(pts, 10_000),
        "dual_averaging_run(EW, n=10^4)": lambda k: k.dual_averaging_run(P, etas, k.MODE_ENTROPY, c),
        "best_response_run(EW, n=10^4)": lambda k: k.best_response_run(d, n, 1.0, etas, k.MODE_ENTROPY, c),
        "best_response_run(Euclid, n=10^4)": lambda k: k.best_response_run(
            d, n, 1.0, etas, k.MODE_EUCLIDEAN_SIMPLEX, c),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':38s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{name:38s} {t_py:12.3f} {'n/a':>14s} {'n/a':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:38s} {t_py:12.3f} {t_cy:14.3f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
