"""Compare the numba and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--size 200000]

Each kernel is called once to warm up (JIT compilation or a cache load), then
timed over ``--repeat`` calls; the table reports the best time per backend and
the max abs difference between the two results.
"""

import argparse
import time

import numpy as np

from rellichkit.kernels import numba_backend, numpy_backend


def best_time(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(size, rng):
    rho = np.sort(rng.uniform(1e-6, 0.25, size))
    xi = rng.standard_normal((max(size // 100, 10), 3))
    w = np.array([1.0, 2.0, 0.5])
    # coarse start in the right direction, as the duality module uses it
    y0 = np.sign(xi) * np.abs(xi) ** (1.0 / 3.0)
    pts = rng.uniform(-1.0, 1.0, (size, 3))
    return {
        "extremal_profile": lambda b: b.extremal_profile(rho, 0.01, 0.001, 0.5, 0.1, 0.2, 5),
        "power_legendre_refine": lambda b: b.power_legendre_refine(xi, y0, 4.0, w, 1e-13, 1e-11, 200),
        "power_ball_count": lambda b: b.power_ball_count(pts, 4.0, w),
    }


def _first(out):
    return np.asarray(out[0] if isinstance(out, tuple) else out, dtype=float)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if numba_backend is None:
        print("numba backend unavailable (disabled or not installed); nothing to compare")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, call in cases(args.size, rng).items():
        t_np = best_time(lambda: call(numpy_backend), args.repeat)
        t_nb = best_time(lambda: call(numba_backend), args.repeat)
        diff = float(np.max(np.abs(_first(call(numpy_backend)) - _first(call(numba_backend)))))
        print(f"{name:<24}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}{diff:>12.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
