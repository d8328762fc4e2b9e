"""Timing comparison of the compiled and pure-numpy kernel backends.

Runs representative workloads through both implementations and prints a
table of best-of-N wall times. Usage:

    python benchmarks/bench_backends.py [--repeat 5] [--scale 1.0]

The numba column is skipped when numba is not installed.
"""

import argparse
import importlib
import time

import numpy as np


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def build_workloads(scale):
    rng = np.random.default_rng(0)
    n_points = int(200_000 * scale)
    points = rng.standard_normal((n_points, 3))
    centroids = rng.standard_normal((64, 3))
    labels = rng.integers(0, 64, n_points)

    side = int(384 * np.sqrt(scale))
    colors = rng.uniform(0.0, 255.0, (side, side, 3))
    k_sp = 256
    grid = int(np.sqrt(k_sp))
    ys, xs = np.meshgrid(np.linspace(2, side - 3, grid), np.linspace(2, side - 3, grid))
    centers = np.column_stack([rng.uniform(0, 255, (k_sp, 3)), ys.ravel(), xs.ravel()])
    window = side / grid * 2.0
    grid_labels = rng.integers(0, k_sp, (side, side))

    n_sig, kmax, dim = int(40 * np.sqrt(scale)) + 2, 8, 3
    sig_centroids = np.zeros((n_sig, kmax, dim))
    sig_masses = np.zeros((n_sig, kmax))
    sig_counts = np.zeros(n_sig, np.int64)
    for i in range(n_sig):
        k = int(rng.integers(2, kmax + 1))
        sig_counts[i] = k
        sig_centroids[i, :k] = rng.standard_normal((k, dim))
        w = rng.uniform(0.2, 1.0, k)
        sig_masses[i, :k] = w / w.sum()

    def workloads(impl):
        out = np.zeros((n_sig, n_sig))
        return [
            ("kmeans_assign", lambda: impl.kmeans_assign(points, centroids)),
            ("update_min_sqdist", lambda: impl.update_min_sqdist(points, centroids[0], np.full(n_points, np.inf))),
            ("accumulate_means", lambda: impl.accumulate_means(points, labels, 64)),
            ("slic_assign", lambda: impl.slic_assign(colors, centers, window, 0.04)),
            ("slic_accumulate", lambda: impl.slic_accumulate(colors, grid_labels, k_sp)),
            ("transport_pairwise", lambda: impl.transport_pairwise(
                sig_centroids, sig_masses, sig_counts, dim, 0, n_sig, 1, 16000, out)),
            ("enforce_connectivity", lambda: impl.enforce_connectivity(grid_labels.copy(), 9)),
        ]

    return workloads


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timed repetitions per kernel")
    parser.add_argument("--scale", type=float, default=1.0, help="workload size multiplier")
    args = parser.parse_args()

    numpy_impl = importlib.import_module("otscale.accel._numpy")
    try:
        numba_impl = importlib.import_module("otscale.accel._numba")
    except ImportError:
        numba_impl = None
        print("numba not installed; timing the numpy path only")

    workloads = build_workloads(args.scale)

    if numba_impl is not None:
        # First call per kernel pays jit compilation; exclude it from timing.
        for _, fn in workloads(numba_impl):
            fn()

    header = f"{'kernel':<22}{'numpy':>12}{'numba':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for (name, numpy_fn), numba_entry in zip(
            workloads(numpy_impl),
            workloads(numba_impl) if numba_impl is not None else workloads(numpy_impl)):
        t_numpy = best_time(numpy_fn, args.repeat)
        if numba_impl is None:
            print(f"{name:<22}{t_numpy * 1e3:>10.2f}ms{'-':>12}{'-':>10}")
            continue
        t_numba = best_time(numba_entry[1], args.repeat)
        print(f"{name:<22}{t_numpy * 1e3:>10.2f}ms{t_numba * 1e3:>10.2f}ms"
              f"{t_numpy / t_numba:>9.1f}x")


if __name__ == "__main__":
    main()
