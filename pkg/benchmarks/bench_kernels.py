"""Compare the compiled kernels against the pure-numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Both backends are imported directly, so a single run times both; the
compiled extension must have been built (pip install -e .).
"""

import time

import numpy as np

from alc import rng
from alc._kernels import pure

try:
    from alc._kernels import _core
except ImportError:
    _core = None


def _bilinear_case(seed, n, r, t, starts):
    gen = rng.stream(seed)
    T = gen.standard_normal((n, r, t))
    theta = gen.standard_normal(r + t - 1)
    a = np.concatenate(([1.0], theta[: r - 1]))
    y = np.einsum("nij,i,j->n", T, a, theta[r - 1:])
    theta0s = gen.standard_normal((starts, r + t - 1))
    return T, y, theta0s


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lm_multi():
    print("lm_bilinear_multi (multi-start damped Gauss-Newton)")
    for n, r, t, starts in ((6, 2, 2, 20), (9, 4, 4, 50), (12, 6, 6, 50)):
        T, y, theta0s = _bilinear_case(1, n, r, t, starts)
        t_pure = _time(lambda: pure.lm_bilinear_multi(T, y, theta0s, 1e-9), 5)
        line = (f"  n={n:2d} r={r} t={t} starts={starts:3d}  "
                f"pure {t_pure * 1e3:8.2f} ms")
        if _core is not None:
            t_core = _time(
                lambda: _core.lm_bilinear_multi(T, y, theta0s, 1e-9), 5)
            line += (f"  compiled {t_core * 1e3:8.2f} ms  "
                     f"speedup {t_pure / t_core:5.1f}x")
        print(line)


def bench_max_pairwise():
    print("max_pairwise_dist (brute-force diameter)")
    for count in (500, 2000, 4000):
        pts = rng.stream(2).random((count, 3))
        t_pure = _time(lambda: pure.max_pairwise_dist(pts), 3)
        line = f"  points={count:5d}  pure {t_pure * 1e3:8.2f} ms"
        if _core is not None:
            t_core = _time(lambda: _core.max_pairwise_dist(pts), 3)
            line += (f"  compiled {t_core * 1e3:8.2f} ms  "
                     f"speedup {t_pure / t_core:5.1f}x")
        print(line)


if __name__ == "__main__":
    if _core is None:
        print("compiled backend not available; timing the fallback only")
    bench_lm_multi()
    bench_max_pairwise()
