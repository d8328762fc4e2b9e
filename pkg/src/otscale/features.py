"""Per-cluster feature signatures via k-means sub-clustering.

Each cluster of nodes is summarized by the centroids of a small k-means
sub-clustering of its feature vectors, weighted by the fraction of the
cluster's nodes each sub-cluster holds. These signatures are what the
transport module compares.
"""

from dataclasses import dataclass, field

import numpy as np

from . import accel
from .errors import InvalidArgumentError, InvalidDataError

__all__ = [
    "SubClustering",
    "ClusterSignature",
    "SubclusterCountPolicy",
    "kmeans",
    "extract_signature",
]

_MAX_ITER = 300


@dataclass(frozen=True)
class SubClustering:
    """Result of k-means on one point set.

    assignments maps each point to a sub-cluster in 0..k-1; centroids[p]
    is the mean of the points assigned to p; sizes[p] their count.
    inertia_history holds the objective value after every Lloyd
    iteration (non-increasing).
    """

    assignments: np.ndarray
    centroids: np.ndarray
    sizes: np.ndarray
    inertia: float
    inertia_history: tuple
    n_iter: int
    converged: bool
    cluster_id: int | None = None


@dataclass(frozen=True)
class ClusterSignature:
    """Representative centroids of one cluster with their mass fractions.

    masses is a strictly positive probability vector: masses[p] is the
    fraction of the cluster's nodes captured by centroid p.
    """

    centroids: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        centroids = np.asarray(self.centroids, dtype=np.float64)
        masses = np.asarray(self.masses, dtype=np.float64)
        if centroids.ndim != 2 or masses.ndim != 1:
            raise InvalidArgumentError("signature needs (k, dim) centroids and (k,) masses")
        if centroids.shape[0] != masses.shape[0]:
            raise InvalidArgumentError("centroid count must equal mass count")
        if not np.all(np.isfinite(centroids)):
            raise InvalidDataError("signature centroids contain non-finite values")
        if masses.shape[0] == 0 or np.any(masses <= 0.0):
            raise InvalidArgumentError("signature masses must be strictly positive")
        if abs(masses.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("signature masses must sum to 1")
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "masses", masses)

    @property
    def size(self):
        return self.centroids.shape[0]

    @property
    def dim(self):
        return self.centroids.shape[1]


@dataclass(frozen=True)
class SubclusterCountPolicy:
    """Chooses how many sub-clusters to extract from a cluster.

    The count is min(kmax, cluster size, number of distinct feature
    rows), so the transport problems downstream stay at most kmax x kmax
    while multimodal content is still represented.
    """

    kmax: int = 8

    def __post_init__(self):
        if self.kmax < 1:
            raise InvalidArgumentError("kmax must be >= 1")

    def count_for(self, n_points, n_distinct):
        return max(1, min(self.kmax, n_points, n_distinct))


def _validate_points(points):
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
        raise InvalidArgumentError("points must be a (n, dim) matrix with n, dim >= 1")
    if not np.all(np.isfinite(points)):
        raise InvalidDataError("points contain non-finite values")
    return points


def _kmeanspp_init(points, k, rng):
    """k-means++ seeding: iteratively sample centers proportionally to
    squared distance from the nearest already-chosen center."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), np.float64)
    first = int(rng.integers(n))
    centroids[0] = points[first]
    if k == 1:
        return centroids
    best = np.full(n, np.inf)
    for c in range(1, k):
        best = accel.update_min_sqdist(points, centroids[c - 1], best)
        total = best.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=best / total))
        else:
            # All points coincide with chosen centers; any choice is tied.
            idx = int(rng.integers(n))
        centroids[c] = points[idx]
    return centroids


def _repair_empty(points, labels, best, counts):
    """Fill each empty cluster with the point currently farthest from its
    centroid, never stealing from a singleton."""
    for c in np.flatnonzero(counts == 0):
        stealable = counts[labels] >= 2
        candidate = int(np.argmax(np.where(stealable, best, -1.0)))
        counts[labels[candidate]] -= 1
        counts[c] += 1
        labels[candidate] = c
        best[candidate] = 0.0


def kmeans(points, k, seed, max_iter=_MAX_ITER):
    """Lloyd's algorithm from a k-means++ start, deterministic per seed.

    Iterates until no assignment changes or max_iter is reached; empty
    clusters are repaired so exactly k non-empty sub-clusters come back.
    """
    points = _validate_points(points)
    n = points.shape[0]
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidArgumentError(f"k must be a positive integer, got {k!r}")
    if k > n:
        raise InvalidArgumentError(f"k={k} exceeds the number of points ({n})")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, int(k), rng)

    labels = None
    history = []
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_labels, best = accel.kmeans_assign(points, centroids)
        counts = np.bincount(new_labels, minlength=k).astype(np.int64)
        if np.any(counts == 0):
            _repair_empty(points, new_labels, best, counts)
        sums, counts = accel.accumulate_means(points, new_labels, k)
        centroids = sums / counts[:, None]
        diff = points - centroids[new_labels]
        history.append(float((diff * diff).sum()))
        if labels is not None and np.array_equal(labels, new_labels):
            converged = True
            labels = new_labels
            break
        labels = new_labels

    sizes = np.bincount(labels, minlength=k).astype(np.int64)
    return SubClustering(
        assignments=labels,
        centroids=centroids,
        sizes=sizes,
        inertia=history[-1],
        inertia_history=tuple(history),
        n_iter=n_iter,
        converged=converged,
    )


def _count_distinct_rows(points):
    return np.unique(points, axis=0).shape[0]


def extract_signature(cluster_nodes, features, policy=None, seed=0, representative="mean", cluster_id=None):
    """Signature of one cluster: sub-cluster centroids plus mass fractions.

    cluster_nodes indexes rows of `features`. The sub-cluster count comes
    from `policy` (default SubclusterCountPolicy()). representative
    selects what stands for each sub-cluster: its mean ("mean", default)
    or the feature vector of the member nearest that mean ("medoid").
    """
    if policy is None:
        policy = SubclusterCountPolicy()
    if representative not in ("mean", "medoid"):
        raise InvalidArgumentError(f"representative must be 'mean' or 'medoid', got {representative!r}")
    cluster_nodes = np.asarray(cluster_nodes, dtype=np.int64)
    if cluster_nodes.size == 0:
        raise InvalidArgumentError("cannot extract a signature from an empty cluster")
    points = _validate_points(np.asarray(features)[cluster_nodes])

    k = policy.count_for(points.shape[0], _count_distinct_rows(points))
    sub = kmeans(points, k, seed)

    if representative == "mean":
        centroids = sub.centroids
    else:
        centroids = np.empty_like(sub.centroids)
        for p in range(k):
            members = np.flatnonzero(sub.assignments == p)
            diff = points[members] - sub.centroids[p]
            centroids[p] = points[members[int(np.argmin((diff * diff).sum(axis=1)))]]

    masses = sub.sizes.astype(np.float64) / points.shape[0]
    masses = masses / masses.sum()
    return ClusterSignature(centroids=centroids, masses=masses)
