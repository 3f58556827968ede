"""Time the jitted batch kernel against the vectorized numpy fallback.

Both backends consume the same counter-based streams, so their outputs are
bit-identical; the script checks that before printing timings. Run from the
repo root:

    python3 benchmarks/bench_kernels.py --trials 500000
"""

import argparse
import time

import numpy as np

from rucgames import PayoffMatrix, SimplexVector
from rucgames._kernels import HAS_NUMBA, run_batch_numpy

if HAS_NUMBA:
    from rucgames._kernels import run_batch_numba


def scenarios(rng):
    hand = PayoffMatrix([[0.0, 2.0], [1.0, 0.0]])
    uniform2 = SimplexVector([0.5, 0.5])
    wide = PayoffMatrix(rng.uniform(0.0, 5.0, size=(8, 8)))
    x8 = SimplexVector(rng.uniform(0.1, 1.0, size=8))
    y8 = SimplexVector(rng.uniform(0.1, 1.0, size=8))
    return [
        ("2x2 single collision", hand, uniform2, uniform2, 1, 0.0),
        ("2x2 three collisions", hand, uniform2, uniform2, 3, 0.0),
        ("8x8 geometric p=0.5", wide, x8, y8, 0, 0.5),
    ]


def run(backend, matrix, x, y, trials, fixed_w, geometric_p):
    return backend(
        matrix.entries,
        matrix.entries,
        np.cumsum(x.weights),
        np.cumsum(y.weights),
        trials,
        12345,
        fixed_w,
        geometric_p,
        10_000,
    )


def best_time(backend, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        out = run(backend, *args)
        best = min(best, time.perf_counter() - start)
    return out, best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    cli = parser.parse_args()

    if not HAS_NUMBA:
        print("numba unavailable (or RUC_NO_NUMBA set); timing the numpy path only")

    rng = np.random.default_rng(7)
    rows = []
    for label, matrix, x, y, fixed_w, geometric_p in scenarios(rng):
        args = (matrix, x, y, cli.trials, fixed_w, geometric_p)
        numpy_out, numpy_s = best_time(run_batch_numpy, args, cli.repeat)
        if HAS_NUMBA:
            run(run_batch_numba, matrix, x, y, 100, fixed_w, geometric_p)  # JIT warmup
            numba_out, numba_s = best_time(run_batch_numba, args, cli.repeat)
            for a, b in zip(numpy_out, numba_out):
                assert np.array_equal(a, b), f"backend outputs diverge on {label}"
            rows.append((label, numpy_s, numba_s))
        else:
            rows.append((label, numpy_s, None))

    print(f"\n{cli.trials} trials per scenario, best of {cli.repeat}\n")
    header = f"{'scenario':<24} {'numpy':>10} {'numba':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for label, numpy_s, numba_s in rows:
        if numba_s is None:
            print(f"{label:<24} {numpy_s:>9.3f}s {'-':>10} {'-':>9}")
        else:
            print(f"{label:<24} {numpy_s:>9.3f}s {numba_s:>9.3f}s {numpy_s / numba_s:>8.1f}x")


if __name__ == "__main__":
    main()
