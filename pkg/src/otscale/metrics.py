"""Evaluation metrics for cluster hierarchies.

The boundary-respect score of a coarse cluster sums an overlap
cardinality against every fine cluster and divides by the coarse
cluster's size. The cardinality of a pair of sets is the size of their
union when they intersect and 0 otherwise, so a coarse cluster that is
exactly a union of fine clusters scores its child count, while clusters
that straddle fine boundaries score higher. Because the literal score
of a perfectly nested cluster is its child count rather than 1, a
normalized variant (literal divided by the number of overlapping fine
clusters, 1 under perfect nesting) is reported alongside it.

Color spread is measured per cluster as the per-channel population
standard deviation averaged over channels, then averaged over clusters
without size weighting.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError
from .pipeline import Hierarchy, Partition

__all__ = [
    "RscReport",
    "overlap_cardinality",
    "rsc",
    "rsc_report",
    "clusterwise_color_std",
    "write_metrics_csv",
]


def _as_node_set(nodes, name):
    nodes = np.asarray(nodes)
    if nodes.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a 1-D array of node ids")
    if nodes.size and not np.issubdtype(nodes.dtype, np.integer):
        raise InvalidArgumentError(f"{name} must contain integers")
    return np.unique(nodes)


def overlap_cardinality(a, b):
    """|a ∪ b| when the sets intersect, else 0."""
    a = _as_node_set(a, "a")
    b = _as_node_set(b, "b")
    n_common = np.intersect1d(a, b, assume_unique=True).size
    if n_common == 0:
        return 0
    return int(a.size + b.size - n_common)


def _fine_labels(fine):
    if isinstance(fine, Partition):
        return fine.labels
    labels = np.asarray(fine)
    if labels.ndim != 1 or labels.size == 0:
        raise InvalidArgumentError("fine partition must be a non-empty 1-D label array")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidArgumentError("fine partition labels must be integers")
    return labels


def rsc(fine, coarse_cluster):
    """Literal boundary-respect score of one coarse cluster.

    fine is a label array (or Partition) over the base nodes;
    coarse_cluster is the set of base nodes forming the coarse cluster.
    """
    labels = _fine_labels(fine)
    coarse = _as_node_set(coarse_cluster, "coarse_cluster")
    if coarse.size == 0:
        raise InvalidArgumentError("coarse cluster is empty")
    if coarse.min() < 0 or coarse.max() >= labels.shape[0]:
        raise InvalidArgumentError("coarse cluster references nodes outside the partition")
    total = 0
    for c in np.unique(labels):
        total += overlap_cardinality(np.flatnonzero(labels == c), coarse)
    return total / coarse.size


@dataclass(frozen=True)
class RscReport:
    """Boundary-respect scores of every coarse cluster against a finer level.

    literal[i] is the raw score of coarse cluster i (its child count
    under perfect nesting); normalized[i] divides by the number of
    overlapping fine clusters and is 1 under perfect nesting.
    """

    literal: np.ndarray
    normalized: np.ndarray

    @property
    def mean_literal(self):
        return float(self.literal.mean())

    @property
    def mean_normalized(self):
        return float(self.normalized.mean())


def rsc_report(fine, coarse):
    """Score every coarse cluster of one level against the finer level."""
    fine_labels = _fine_labels(fine)
    coarse_labels = _fine_labels(coarse)
    if fine_labels.shape != coarse_labels.shape:
        raise InvalidArgumentError("fine and coarse partitions cover different node sets")
    n_coarse = int(coarse_labels.max()) + 1
    literal = np.empty(n_coarse)
    normalized = np.empty(n_coarse)
    for i in range(n_coarse):
        members = np.flatnonzero(coarse_labels == i)
        if members.size == 0:
            raise InvalidArgumentError(f"coarse cluster {i} is empty")
        value = rsc(fine_labels, members)
        n_overlapping = np.unique(fine_labels[members]).size
        literal[i] = value
        normalized[i] = value / n_overlapping
    return RscReport(literal=literal, normalized=normalized)


def clusterwise_color_std(partition, colors):
    """Mean over clusters of each cluster's channel-averaged color std."""
    labels = _fine_labels(partition)
    colors = np.asarray(colors, dtype=np.float64)
    if colors.ndim != 2 or colors.shape[1] < 1:
        raise InvalidArgumentError("colors must be a (n, channels) matrix")
    if colors.shape[0] != labels.shape[0]:
        raise InvalidArgumentError("colors cover a different node count than the partition")
    if not np.all(np.isfinite(colors)):
        raise InvalidDataError("colors contain non-finite values")
    per_cluster = [
        colors[labels == c].std(axis=0).mean() for c in np.unique(labels)
    ]
    return float(np.mean(per_cluster))


def write_metrics_csv(path, hierarchy, colors=None):
    """Per-level metric table: cluster counts, boundary scores, color spread.

    Boundary-respect columns compare each level to the one below and are
    empty on the base level; the color column is empty when no colors
    are given. Formatting is deterministic (repr of floats).
    """
    if not isinstance(hierarchy, Hierarchy):
        raise InvalidArgumentError("hierarchy must be a Hierarchy")
    rows = []
    for level in range(hierarchy.n_levels):
        labels = hierarchy.labels_at(level)
        row = {
            "level": level,
            "n_clusters": int(labels.max()) + 1,
            "rsc_literal_mean": "",
            "rsc_normalized_mean": "",
            "color_std": "",
        }
        if level > 0:
            report = rsc_report(hierarchy.labels_at(level - 1), labels)
            row["rsc_literal_mean"] = repr(report.mean_literal)
            row["rsc_normalized_mean"] = repr(report.mean_normalized)
        if colors is not None:
            row["color_std"] = repr(clusterwise_color_std(labels, colors))
        rows.append(row)

    fieldnames = ["level", "n_clusters", "rsc_literal_mean", "rsc_normalized_mean", "color_std"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
