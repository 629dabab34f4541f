"""Time the compiled and pure-Python LOO objective on random problems.

Usage: python3 benchmarks/bench_backends.py [--sizes 20 100 400] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from jointgp import _fallback

try:
    from jointgp import _core
except ImportError:
    _core = None


def problem(n, d=6, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = rng.normal(size=n)
    weights = np.ones(n)
    weights[: n // 2] = 10.0
    return X, y, weights, n - n // 2


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[20, 100, 400, 900])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    if _core is None:
        print("compiled core not built; only the fallback is timed")
    print(f"{'n':>6} {'python (ms)':>12} {'compiled (ms)':>14} {'speedup':>8} {'max |diff|':>11}")
    for n in args.sizes:
        X, y, w, r = problem(n)
        call = (X, y, w, r, 1.3, 0.2)
        t_py = min(timeit.repeat(lambda: _fallback.loo_objective(*call), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{n:>6} {1e3 * t_py:>12.3f}")
            continue
        t_c = min(timeit.repeat(lambda: _core.loo_objective(*call), number=1, repeat=args.repeat))
        diff = abs(_core.loo_objective(*call) - _fallback.loo_objective(*call))
        print(f"{n:>6} {1e3 * t_py:>12.3f} {1e3 * t_c:>14.3f} {t_py / t_c:>8.2f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
