"""Compare the compiled and pure-numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from rotorcm import _kernels_py

try:
    from rotorcm import _kernels
except ImportError:
    _kernels = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_wpt(impl, sizes, repeats):
    rng = np.random.default_rng(0)
    out = {}
    for n in sizes:
        x = rng.standard_normal(n)
        out[n] = timeit(lambda: impl.haar_wpt_energies(x), repeats)
    return out


def bench_split(impl, shapes, repeats):
    rng = np.random.default_rng(1)
    out = {}
    for rows, cols, nfeat in shapes:
        X = rng.standard_normal((rows, cols))
        y = rng.integers(0, 7, rows).astype(np.int64)
        feats = np.arange(nfeat, dtype=np.int64)
        out[(rows, cols, nfeat)] = timeit(lambda: impl.best_split_gini(X, y, feats, 7), repeats)
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    else:
        print("compiled extension not available; benchmarking fallback only")

    sizes = (200, 1600, 8000, 48000)
    shapes = ((324, 94, 9), (324, 708, 26), (4536, 94, 94), (4536, 708, 26))

    wpt = {name: bench_wpt(impl, sizes, args.repeats) for name, impl in backends}
    print("\nhaar_wpt_energies (best of %d, seconds)" % args.repeats)
    print(f"{'n':>8} " + " ".join(f"{name:>12}" for name, _ in backends) + "  speedup")
    for n in sizes:
        row = [wpt[name][n] for name, _ in backends]
        ratio = row[0] / row[-1] if len(row) > 1 else 1.0
        print(f"{n:>8} " + " ".join(f"{t:12.3e}" for t in row) + f"  {ratio:6.1f}x")

    split = {name: bench_split(impl, shapes, args.repeats) for name, impl in backends}
    print("\nbest_split_gini (best of %d, seconds)" % args.repeats)
    print(f"{'rows x cols / feats':>20} " + " ".join(f"{name:>12}" for name, _ in backends) + "  speedup")
    for shape in shapes:
        row = [split[name][shape] for name, _ in backends]
        ratio = row[0] / row[-1] if len(row) > 1 else 1.0
        label = f"{shape[0]}x{shape[1]}/{shape[2]}"
        print(f"{label:>20} " + " ".join(f"{t:12.3e}" for t in row) + f"  {ratio:6.1f}x")


if __name__ == "__main__":
    main()
