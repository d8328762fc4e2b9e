"""Pure-numpy kernel backend.

Vectorized where numpy can express the computation; the transportation
solver and the connectivity pass run the shared loop source interpreted.
Arithmetic is arranged to match the numba loop kernels operation-for-
operation so both backends produce identical results.
"""

import numpy as np

from ._loops import enforce_connectivity, transport_pairwise, transport_solve

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

_CHUNK = 8192


def kmeans_assign(points, centroids):
    """Nearest-centroid assignment. Returns (labels, squared distances)."""
    n = points.shape[0]
    labels = np.empty(n, np.int64)
    best = np.empty(n, np.float64)
    for s in range(0, n, _CHUNK):
        e = min(n, s + _CHUNK)
        diff = points[s:e, None, :] - centroids[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        idx = d2.argmin(axis=1)
        labels[s:e] = idx
        best[s:e] = d2[np.arange(e - s), idx]
    return labels, best


def update_min_sqdist(points, center, best):
    """Elementwise min of `best` and squared distance to one center."""
    diff = points - center[None, :]
    d2 = (diff * diff).sum(axis=1)
    return np.minimum(best, d2)


def accumulate_means(points, labels, k):
    """Per-cluster feature sums and sizes. Returns (sums, counts)."""
    sums = np.zeros((k, points.shape[1]), np.float64)
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


def slic_assign(colors, centers, window, invwt):
    """One superpixel assignment sweep over per-center search windows.

    colors: (H, W, C) float64; centers: (K, C+2) rows [channels..., y, x];
    window: half-size of the search window in pixels; invwt: spatial
    weight (compactness/S)^2. Returns (labels, distances); pixels outside
    every window keep label -1.
    """
    h, w = colors.shape[0], colors.shape[1]
    k = centers.shape[0]
    nc = colors.shape[2]
    labels = np.full((h, w), -1, np.int64)
    best = np.full((h, w), np.inf, np.float64)
    for c in range(k):
        cy = centers[c, nc]
        cx = centers[c, nc + 1]
        y0 = max(0, int(cy - window))
        y1 = min(h, int(cy + window) + 1)
        x0 = max(0, int(cx - window))
        x1 = min(w, int(cx + window) + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        block = colors[y0:y1, x0:x1, :]
        dc = ((block - centers[c, :nc]) ** 2).sum(axis=2)
        dy = (np.arange(y0, y1, dtype=np.float64) - cy) ** 2
        dx = (np.arange(x0, x1, dtype=np.float64) - cx) ** 2
        d = dc + invwt * (dy[:, None] + dx[None, :])
        sub_best = best[y0:y1, x0:x1]
        sub_labels = labels[y0:y1, x0:x1]
        mask = d < sub_best
        sub_best[mask] = d[mask]
        sub_labels[mask] = c
    return labels, best


def slic_accumulate(colors, labels, k):
    """Per-superpixel sums of (channels..., y, x) and pixel counts."""
    h, w, nc = colors.shape
    flat = labels.ravel()
    feats = np.empty((h * w, nc + 2), np.float64)
    feats[:, :nc] = colors.reshape(-1, nc)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    feats[:, nc] = yy.ravel()
    feats[:, nc + 1] = xx.ravel()
    sums = np.zeros((k, nc + 2), np.float64)
    np.add.at(sums, flat, feats)
    counts = np.bincount(flat, minlength=k).astype(np.int64)
    return sums, counts
