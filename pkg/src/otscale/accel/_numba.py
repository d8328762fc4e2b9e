"""Numba kernel backend.

Loop kernels compiled with @njit; the shared loop-source solver and
connectivity pass are compiled from the same functions the numpy backend
interprets. Kernels are nogil so callers may thread over disjoint slices.
"""

import numpy as np
from numba import njit

from . import _loops

__all__ = [
    "kmeans_assign",
    "update_min_sqdist",
    "accumulate_means",
    "transport_solve",
    "transport_pairwise",
    "slic_assign",
    "slic_accumulate",
    "enforce_connectivity",
]

transport_solve = njit(cache=True, nogil=True)(_loops.transport_solve)
enforce_connectivity = njit(cache=True, nogil=True)(_loops.enforce_connectivity)


@njit(cache=True, nogil=True)
def kmeans_assign(points, centroids):
    n, dim = points.shape
    k = centroids.shape[0]
    labels = np.empty(n, np.int64)
    best = np.empty(n, np.float64)
    for a in range(n):
        bi = 0
        bd = np.inf
        for c in range(k):
            s = 0.0
            for f in range(dim):
                d = points[a, f] - centroids[c, f]
                s += d * d
            if s < bd:
                bd = s
                bi = c
        labels[a] = bi
        best[a] = bd
    return labels, best


@njit(cache=True, nogil=True)
def update_min_sqdist(points, center, best):
    n, dim = points.shape
    out = np.empty(n, np.float64)
    for a in range(n):
        s = 0.0
        for f in range(dim):
            d = points[a, f] - center[f]
            s += d * d
        out[a] = s if s < best[a] else best[a]
    return out


@njit(cache=True, nogil=True)
def accumulate_means(points, labels, k):
    n, dim = points.shape
    sums = np.zeros((k, dim), np.float64)
    counts = np.zeros(k, np.int64)
    for a in range(n):
        c = labels[a]
        counts[c] += 1
        for f in range(dim):
            sums[c, f] += points[a, f]
    return sums, counts


# transport_pairwise calls transport_solve, so it is compiled from source
# here rather than reusing the shared driver verbatim.
@njit(cache=True, nogil=True)
def transport_pairwise(centroids, masses, counts, dim, row_start, row_stop, row_step, max_iter, out):
    n_sig = counts.shape[0]
    failures = 0
    for i in range(row_start, row_stop, row_step):
        ki = counts[i]
        for j in range(i + 1, n_sig):
            kj = counts[j]
            cost = np.empty((ki, kj), np.float64)
            for p in range(ki):
                for q in range(kj):
                    s = 0.0
                    for f in range(dim):
                        d = centroids[i, p, f] - centroids[j, q, f]
                        s += d * d
                    cost[p, q] = s
            res = transport_solve(cost, masses[i, :ki].copy(), masses[j, :kj].copy(), max_iter)
            out[i, j] = res[3]
            failures += res[6]
    return failures


@njit(cache=True, nogil=True)
def slic_assign(colors, centers, window, invwt):
    h, w, nc = colors.shape
    k = centers.shape[0]
    labels = np.full((h, w), -1, np.int64)
    best = np.full((h, w), np.inf, np.float64)
    for c in range(k):
        cy = centers[c, nc]
        cx = centers[c, nc + 1]
        y0 = max(0, int(cy - window))
        y1 = min(h, int(cy + window) + 1)
        x0 = max(0, int(cx - window))
        x1 = min(w, int(cx + window) + 1)
        for y in range(y0, y1):
            dy = (y - cy) ** 2
            for x in range(x0, x1):
                dc = 0.0
                for f in range(nc):
                    d = colors[y, x, f] - centers[c, f]
                    dc += d * d
                dist = dc + invwt * (dy + (x - cx) ** 2)
                if dist < best[y, x]:
                    best[y, x] = dist
                    labels[y, x] = c
    return labels, best


@njit(cache=True, nogil=True)
def slic_accumulate(colors, labels, k):
    h, w, nc = colors.shape
    sums = np.zeros((k, nc + 2), np.float64)
    counts = np.zeros(k, np.int64)
    for y in range(h):
        for x in range(w):
            c = labels[y, x]
            counts[c] += 1
            for f in range(nc):
                sums[c, f] += colors[y, x, f]
            sums[c, nc] += y
            sums[c, nc + 1] += x
    return sums, counts
