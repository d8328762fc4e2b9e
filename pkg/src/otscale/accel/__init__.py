"""Kernel backend selection.

Hot inner loops (nearest-centroid assignment, superpixel sweeps, the
exact transportation solver) exist twice: numba @njit loop kernels and a
pure-numpy fallback. The OTSCALE_BACKEND environment variable picks the
implementation at import time:

    auto    numba when importable, numpy otherwise (default)
    numba   require numba, fail if it cannot be imported
    numpy   force the pure-numpy path

`benchmarks/bench_backends.py` compares the two paths on representative
workloads.
"""

import os

import numpy as np

from . import _numpy

_KERNEL_NAMES = [
    "kmeans_assign",
    "update_min_sqdist",
    "accumulate_means",
    "transport_solve",
    "transport_pairwise",
    "slic_assign",
    "slic_accumulate",
    "enforce_connectivity",
]

__all__ = _KERNEL_NAMES + ["BACKEND", "warmup"]


def _select():
    choice = os.environ.get("OTSCALE_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"OTSCALE_BACKEND must be 'auto', 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", _numpy
    try:
        from . import _numba
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", _numpy
    return "numba", _numba


BACKEND, _impl = _select()

kmeans_assign = _impl.kmeans_assign
update_min_sqdist = _impl.update_min_sqdist
accumulate_means = _impl.accumulate_means
transport_solve = _impl.transport_solve
transport_pairwise = _impl.transport_pairwise
slic_assign = _impl.slic_assign
slic_accumulate = _impl.slic_accumulate
enforce_connectivity = _impl.enforce_connectivity

_warmed = False


def warmup():
    """Run every kernel once on toy inputs so jit compilation cost is paid
    upfront. A no-op beyond the first call (and cheap on the numpy path)."""
    global _warmed
    if _warmed:
        return
    points = np.array([[0.0, 0.0], [1.0, 1.0], [4.0, 5.0]])
    centroids = np.array([[0.0, 0.0], [4.0, 5.0]])
    labels, best = kmeans_assign(points, centroids)
    update_min_sqdist(points, centroids[0], best)
    accumulate_means(points, labels, 2)
    cost = np.array([[0.0, 1.0], [1.0, 0.0]])
    half = np.array([0.5, 0.5])
    transport_solve(cost, half.copy(), half.copy(), 100)
    cents = np.zeros((2, 2, 2))
    cents[1, :, :] = 1.0
    masses = np.full((2, 2), 0.5)
    counts = np.full(2, 2, np.int64)
    out = np.zeros((2, 2))
    transport_pairwise(cents, masses, counts, 2, 0, 2, 1, 100, out)
    colors = np.zeros((4, 4, 3))
    centers = np.array([[0.0, 0.0, 0.0, 1.5, 1.5]])
    grid_labels, _ = slic_assign(colors, centers, 4.0, 1.0)
    slic_accumulate(colors, grid_labels, 1)
    enforce_connectivity(grid_labels, 1)
    _warmed = True
