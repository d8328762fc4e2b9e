"""Multilevel coarsening pipeline.

One coarsening step summarizes each current cluster by a transport
signature, measures exact transport distances between all signatures,
builds the variable-threshold neighbor graph on those distances, and
cuts it spectrally into the next level's clusters. Iterating the step
down a strictly decreasing schedule of cluster counts yields a nested
hierarchy over the base nodes.

Every level's labels live over the base nodes, and level l+1 is
obtained from level l through a parent map over level-l clusters, so
nesting holds by construction. Labels are kept canonical: cluster ids
are assigned in order of first appearance in base-node order.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    FileFormatError,
    InvalidArgumentError,
    InvalidDataError,
    InvalidScheduleError,
    OtscaleError,
)
from .features import SubclusterCountPolicy, extract_signature
from .spectral import normalized_cut
from .transport import pairwise_distances
from .vknng import AlphaPolicy, build_adjacency, compute_alphas

__all__ = [
    "Partition",
    "CoarsenConfig",
    "LevelGraphs",
    "Hierarchy",
    "derive_seed",
    "canonical_labels",
    "geometric_schedule",
    "coarsen_one_level",
    "build_hierarchy",
]

FORMAT_NAME = "otscale-hierarchy"
FORMAT_VERSION = 1


def derive_seed(master, *keys):
    """Stable per-stage seed derived from a master seed and key path.

    String keys are folded in through sha256 so the same (master, keys)
    pair gives the same seed on any platform or process.
    """
    parts = [int(master) & 0xFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            digest = hashlib.sha256(key.encode("utf-8")).digest()
            parts.append(int.from_bytes(digest[:4], "big"))
        elif isinstance(key, (int, np.integer)):
            parts.append(int(key) & 0xFFFFFFFF)
        else:
            raise InvalidArgumentError(f"seed keys must be int or str, got {type(key).__name__}")
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint32)[0])


def canonical_labels(labels):
    """Dense 0-based labels ordered by first appearance."""
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise InvalidArgumentError("labels must be a non-empty 1-D array")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidArgumentError("labels must be integers")
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse].astype(np.int64)


def _canonical_parent_map(parent_map):
    remap = {}
    out = np.empty_like(parent_map)
    for c, p in enumerate(parent_map.tolist()):
        if p not in remap:
            remap[p] = len(remap)
        out[c] = remap[p]
    return out


@dataclass(frozen=True)
class Partition:
    """Dense clustering of base nodes: labels in 0..n_clusters-1."""

    labels: np.ndarray
    n_clusters: int

    @classmethod
    def from_labels(cls, labels):
        labels = canonical_labels(labels)
        return cls(labels=labels, n_clusters=int(labels.max()) + 1)


@dataclass(frozen=True)
class CoarsenConfig:
    """Knobs for one coarsening step, shared across levels.

    kmax caps the signature size per cluster; representative picks mean
    or medoid sub-cluster representatives; alpha_policy/alpha_k choose
    the neighbor-threshold rule; kernel/weight_mode choose how distances
    become edge weights; n_jobs parallelizes the transport matrix.
    """

    kmax: int = 8
    representative: str = "mean"
    alpha_policy: str = "order-statistic"
    alpha_k: int | None = None
    kernel: str = "gaussian"
    weight_mode: str = "kernel"
    n_jobs: int = 1

    def __post_init__(self):
        SubclusterCountPolicy(kmax=self.kmax)
        if self.representative not in ("mean", "medoid"):
            raise InvalidArgumentError(f"unknown representative {self.representative!r}")
        AlphaPolicy(kind=self.alpha_policy, k=self.alpha_k)
        if self.kernel not in ("gaussian", "uniform"):
            raise InvalidArgumentError(f"unknown kernel {self.kernel!r}")
        if self.weight_mode not in ("kernel", "literal-distance"):
            raise InvalidArgumentError(f"unknown weight_mode {self.weight_mode!r}")
        if not isinstance(self.n_jobs, (int, np.integer)) or self.n_jobs < 1:
            raise InvalidArgumentError("n_jobs must be a positive integer")

    def alpha(self):
        return AlphaPolicy(kind=self.alpha_policy, k=self.alpha_k)


@dataclass(frozen=True)
class LevelGraphs:
    """Distance and adjacency matrices produced by one coarsening step.

    Both are indexed by the finer level's cluster ids, so coarsening
    N_l clusters yields N_l x N_l matrices."""

    distances: np.ndarray
    adjacency: np.ndarray


def _validate_features(features):
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise InvalidArgumentError("features must be a non-empty (n, dim) matrix")
    if not np.all(np.isfinite(features)):
        raise InvalidDataError("features contain non-finite values")
    return features


def _validate_dense_labels(labels, n_nodes):
    labels = np.asarray(labels)
    if labels.shape != (n_nodes,):
        raise InvalidArgumentError(f"labels must have shape ({n_nodes},), got {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidArgumentError("labels must be integers")
    k = int(labels.max()) + 1
    if labels.min() < 0 or np.unique(labels).size != k:
        raise InvalidArgumentError("labels must be dense 0-based cluster ids")
    return labels.astype(np.int64), k


def coarsen_one_level(features, labels, n_next, config=None, seed=0):
    """Merge the current clusters into n_next parents.

    Returns (parent_map, graphs): parent_map[c] is the parent of
    cluster c, canonically relabeled; graphs carries the level's
    distance and adjacency matrices over the input clusters.
    """
    if config is None:
        config = CoarsenConfig()
    features = _validate_features(features)
    labels, k = _validate_dense_labels(labels, features.shape[0])
    if k < 2:
        raise InvalidArgumentError("need at least two clusters to coarsen")
    if not isinstance(n_next, (int, np.integer)) or not 1 <= n_next <= k:
        raise InvalidArgumentError(f"n_next must be in [1, {k}], got {n_next!r}")

    policy = SubclusterCountPolicy(kmax=config.kmax)
    signatures = [
        extract_signature(
            np.flatnonzero(labels == c),
            features,
            policy,
            seed=derive_seed(seed, "signature", c),
            representative=config.representative,
        )
        for c in range(k)
    ]
    Z = pairwise_distances(signatures, n_jobs=config.n_jobs)
    A = build_adjacency(Z, compute_alphas(Z, config.alpha()), config.kernel, config.weight_mode)
    parent_map = normalized_cut(A, int(n_next), seed=derive_seed(seed, "spectral"))
    return _canonical_parent_map(parent_map), LevelGraphs(distances=Z, adjacency=A)


def geometric_schedule(n_start, n_final, n_levels):
    """Strictly decreasing cluster counts interpolated geometrically.

    Returns n_levels counts ending exactly at n_final, all below
    n_start. Raises when no strictly decreasing schedule fits.
    """
    for name, v in (("n_start", n_start), ("n_final", n_final), ("n_levels", n_levels)):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise InvalidScheduleError(f"{name} must be a positive integer, got {v!r}")
    if n_final >= n_start:
        raise InvalidScheduleError(f"n_final ({n_final}) must be below n_start ({n_start})")
    if n_levels > n_start - n_final:
        raise InvalidScheduleError(
            f"{n_levels} strictly decreasing levels cannot fit between {n_start} and {n_final}"
        )
    ratio = (n_final / n_start) ** (1.0 / n_levels)
    counts = [int(round(n_start * ratio**l)) for l in range(1, n_levels + 1)]
    counts[-1] = n_final
    for l in range(n_levels - 2, -1, -1):
        counts[l] = max(counts[l], counts[l + 1] + 1)
    if counts[0] >= n_start:
        raise InvalidScheduleError("schedule does not strictly decrease from n_start")
    return counts


def _validate_schedule(schedule, n_start):
    schedule = list(schedule)
    if not schedule:
        raise InvalidScheduleError("schedule is empty")
    for v in schedule:
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise InvalidScheduleError(f"schedule entries must be positive integers, got {v!r}")
    if schedule[0] >= n_start:
        raise InvalidScheduleError(
            f"first schedule entry ({schedule[0]}) must be below the initial cluster count ({n_start})"
        )
    for a, b in zip(schedule, schedule[1:]):
        if b >= a:
            raise InvalidScheduleError(f"schedule must strictly decrease, got {a} -> {b}")
    return [int(v) for v in schedule]


@dataclass
class Hierarchy:
    """Nested partitions of the base nodes, finest first.

    level_labels[l][i] is base node i's cluster at level l;
    parent_maps[l][c] is the level-l+1 parent of level-l cluster c.
    graphs[l], when kept, holds the matrices used to coarsen level l.
    """

    level_labels: list
    parent_maps: list
    graphs: list | None = None

    def __post_init__(self):
        if not self.level_labels:
            raise InvalidArgumentError("hierarchy needs at least one level")
        if len(self.parent_maps) != len(self.level_labels) - 1:
            raise InvalidArgumentError("need exactly one parent map between consecutive levels")

    @property
    def n_levels(self):
        return len(self.level_labels)

    @property
    def n_base(self):
        return self.level_labels[0].shape[0]

    @property
    def counts(self):
        return [int(labels.max()) + 1 for labels in self.level_labels]

    def labels_at(self, level):
        if not 0 <= level < self.n_levels:
            raise InvalidArgumentError(f"level {level} out of range [0, {self.n_levels})")
        return self.level_labels[level]

    def members(self, level, cluster):
        """Base-node ids belonging to one cluster."""
        return np.flatnonzero(self.labels_at(level) == cluster)

    def check_nesting(self):
        """Verify every fine cluster lies inside exactly one parent."""
        for l, pmap in enumerate(self.parent_maps):
            fine, coarse = self.level_labels[l], self.level_labels[l + 1]
            if not np.array_equal(pmap[fine], coarse):
                raise InvalidDataError(f"nesting violated between levels {l} and {l + 1}")

    def to_json(self, include_matrices=False):
        """Canonical JSON bytes; identical hierarchies serialize identically."""
        doc = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "n_base": int(self.n_base),
            "counts": self.counts,
            "base_labels": self.level_labels[0].tolist(),
            "parent_maps": [pmap.tolist() for pmap in self.parent_maps],
        }
        if include_matrices:
            if self.graphs is None:
                raise InvalidArgumentError("matrices were not kept for this hierarchy")
            doc["distance_matrices"] = [g.distances.tolist() for g in self.graphs]
            doc["adjacency_matrices"] = [g.adjacency.tolist() for g in self.graphs]
        return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("ascii")

    def save(self, path, include_matrices=False):
        with open(path, "wb") as fh:
            fh.write(self.to_json(include_matrices))

    @classmethod
    def from_json(cls, data):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"hierarchy file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
            raise FileFormatError(f"not a {FORMAT_NAME} document")
        if doc.get("version") != FORMAT_VERSION:
            raise FileFormatError(f"unsupported version {doc.get('version')!r}")
        try:
            base = np.asarray(doc["base_labels"], dtype=np.int64)
            pmaps = [np.asarray(p, dtype=np.int64) for p in doc["parent_maps"]]
            counts = [int(c) for c in doc["counts"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"malformed hierarchy document: {exc}") from exc
        if base.ndim != 1 or base.size == 0:
            raise FileFormatError("base labels must be a non-empty 1-D array")
        if base.min() < 0 or np.unique(base).size != base.max() + 1:
            raise FileFormatError("base labels must use dense 0-based cluster ids")
        levels = [base]
        for pmap in pmaps:
            if pmap.ndim != 1 or pmap.size == 0:
                raise FileFormatError("parent maps must be non-empty 1-D arrays")
            if pmap.min() < 0 or np.unique(pmap).size != pmap.max() + 1:
                raise FileFormatError("parent maps must use dense 0-based cluster ids")
            if pmap.shape[0] != int(levels[-1].max()) + 1:
                raise FileFormatError("parent map length disagrees with cluster count")
            levels.append(pmap[levels[-1]])
        graphs = None
        if "distance_matrices" in doc:
            try:
                graphs = [
                    LevelGraphs(
                        distances=np.asarray(z, dtype=np.float64),
                        adjacency=np.asarray(a, dtype=np.float64),
                    )
                    for z, a in zip(doc["distance_matrices"], doc["adjacency_matrices"], strict=True)
                ]
            except (KeyError, TypeError, ValueError) as exc:
                raise FileFormatError(f"malformed hierarchy matrices: {exc}") from exc
        hierarchy = cls(level_labels=levels, parent_maps=pmaps, graphs=graphs)
        if hierarchy.counts != counts:
            raise FileFormatError("hierarchy counts disagree with labels")
        hierarchy.check_nesting()
        return hierarchy

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_json(fh.read())


def build_hierarchy(features, initial_labels, schedule, config=None, seed=0, keep_graphs=False):
    """Coarsen an initial partition down a schedule of cluster counts.

    schedule lists the cluster count of every level after the initial
    partition and must strictly decrease from below the initial count.
    The same (inputs, config, seed) always produce the same hierarchy.
    """
    if config is None:
        config = CoarsenConfig()
    features = _validate_features(features)
    labels = canonical_labels(initial_labels)
    if labels.shape[0] != features.shape[0]:
        raise InvalidArgumentError(
            f"labels cover {labels.shape[0]} nodes but features have {features.shape[0]} rows"
        )
    n_start = int(labels.max()) + 1
    schedule = _validate_schedule(schedule, n_start)

    levels = [labels]
    pmaps = []
    graphs = [] if keep_graphs else None
    for l, target in enumerate(schedule):
        try:
            pmap, level_graphs = coarsen_one_level(
                features, levels[-1], target, config, seed=derive_seed(seed, "level", l)
            )
        except OtscaleError as exc:
            # Same error class, annotated with where in the hierarchy it happened.
            raise type(exc)(f"coarsening level {l}: {exc}") from exc
        pmaps.append(pmap)
        levels.append(pmap[levels[-1]])
        if keep_graphs:
            graphs.append(level_graphs)
    return Hierarchy(level_labels=levels, parent_maps=pmaps, graphs=graphs)
