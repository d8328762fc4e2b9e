"""Coarsening pipeline tests: seeding, schedules, nesting, export."""

import json

import numpy as np
import pytest

from otscale.errors import (
    FileFormatError,
    InvalidArgumentError,
    InvalidScheduleError,
)
from otscale.pipeline import (
    CoarsenConfig,
    Hierarchy,
    Partition,
    build_hierarchy,
    canonical_labels,
    coarsen_one_level,
    derive_seed,
    geometric_schedule,
)


def blob_data(rng, centers, per_cluster=6, spread=0.05):
    """Base nodes scattered around 1-D centers, one initial cluster each."""
    features, labels = [], []
    for c, center in enumerate(centers):
        features.append(center + spread * rng.standard_normal((per_cluster, 1)))
        labels.extend([c] * per_cluster)
    return np.vstack(features), np.array(labels)


def test_derive_seed_is_stable_and_keyed():
    assert derive_seed(7, "level", 0) == derive_seed(7, "level", 0)
    assert derive_seed(7, "level", 0) != derive_seed(7, "level", 1)
    assert derive_seed(7, "level", 0) != derive_seed(8, "level", 0)
    assert derive_seed(7, "signature", 0) != derive_seed(7, "spectral", 0)
    with pytest.raises(InvalidArgumentError):
        derive_seed(7, 1.5)


def test_canonical_labels():
    np.testing.assert_array_equal(canonical_labels([5, 5, 2, 7, 2]), [0, 0, 1, 2, 1])
    np.testing.assert_array_equal(canonical_labels([0, 1, 2]), [0, 1, 2])
    with pytest.raises(InvalidArgumentError):
        canonical_labels([0.5, 1.0])
    with pytest.raises(InvalidArgumentError):
        canonical_labels([])


def test_partition_from_labels():
    part = Partition.from_labels([9, 9, 4])
    np.testing.assert_array_equal(part.labels, [0, 0, 1])
    assert part.n_clusters == 2


def test_geometric_schedule_shape():
    sched = geometric_schedule(256, 3, 3)
    assert len(sched) == 3
    assert sched[-1] == 3
    assert sched[0] < 256
    assert all(a > b for a, b in zip(sched, sched[1:]))


def test_geometric_schedule_exact_powers():
    assert geometric_schedule(64, 1, 3) == [16, 4, 1]
    assert geometric_schedule(10, 9, 1) == [9]


def test_geometric_schedule_validation():
    with pytest.raises(InvalidScheduleError):
        geometric_schedule(5, 3, 4)
    with pytest.raises(InvalidScheduleError):
        geometric_schedule(5, 5, 1)
    with pytest.raises(InvalidScheduleError):
        geometric_schedule(5, 0, 1)
    with pytest.raises(InvalidScheduleError):
        geometric_schedule(5.0, 1, 2)


def test_coarsen_groups_similar_clusters():
    rng = np.random.default_rng(0)
    # Three pairs of near-identical clusters, far between pairs.
    features, labels = blob_data(rng, [0.0, 0.5, 10.0, 10.5, 20.0, 20.5])
    pmap, graphs = coarsen_one_level(features, labels, 3, seed=1)
    assert pmap.shape == (6,)
    assert pmap[0] == pmap[1]
    assert pmap[2] == pmap[3]
    assert pmap[4] == pmap[5]
    assert len({pmap[0], pmap[2], pmap[4]}) == 3
    # Canonical relabeling: parents appear in cluster-id order.
    np.testing.assert_array_equal(pmap, [0, 0, 1, 1, 2, 2])
    assert graphs.distances.shape == (6, 6)
    assert graphs.adjacency.shape == (6, 6)
    # Within-pair transport distances must be the small ones.
    assert graphs.distances[0, 1] < graphs.distances[0, 2]


def test_coarsen_validation():
    rng = np.random.default_rng(1)
    features, labels = blob_data(rng, [0.0, 5.0])
    with pytest.raises(InvalidArgumentError):
        coarsen_one_level(features, labels, 3)
    with pytest.raises(InvalidArgumentError):
        coarsen_one_level(features, labels, 0)
    with pytest.raises(InvalidArgumentError):
        coarsen_one_level(features, np.zeros_like(labels), 1)
    with pytest.raises(InvalidArgumentError):
        coarsen_one_level(features, labels[:-1], 1)
    sparse = labels.copy()
    sparse[sparse == 1] = 5
    with pytest.raises(InvalidArgumentError):
        coarsen_one_level(features, sparse, 1)


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        CoarsenConfig(kmax=0)
    with pytest.raises(InvalidArgumentError):
        CoarsenConfig(representative="median")
    with pytest.raises(InvalidArgumentError):
        CoarsenConfig(alpha_policy="knn")
    with pytest.raises(InvalidArgumentError):
        CoarsenConfig(kernel="cosine")
    with pytest.raises(InvalidArgumentError):
        CoarsenConfig(n_jobs=0)


def test_hierarchy_nesting_on_random_inputs():
    rng = np.random.default_rng(42)
    for trial in range(10):
        n_start = int(rng.integers(6, 14))
        features, labels = blob_data(
            rng, rng.uniform(0, 50, size=n_start), per_cluster=int(rng.integers(3, 7))
        )
        n_levels = int(rng.integers(1, 4))
        n_final = int(rng.integers(1, max(2, n_start - n_levels)))
        schedule = geometric_schedule(n_start, n_final, n_levels)
        h = build_hierarchy(features, labels, schedule, seed=trial)
        h.check_nesting()
        assert h.counts == [n_start] + schedule
        for lv in h.level_labels:
            np.testing.assert_array_equal(lv, canonical_labels(lv))


def test_hierarchy_deterministic_export():
    rng = np.random.default_rng(9)
    features, labels = blob_data(rng, [0, 1, 10, 11, 20, 21, 30, 31])
    a = build_hierarchy(features, labels, [4, 2], seed=3, keep_graphs=True)
    b = build_hierarchy(features, labels, [4, 2], seed=3, keep_graphs=True)
    assert a.to_json() == b.to_json()
    assert a.to_json(include_matrices=True) == b.to_json(include_matrices=True)


def test_hierarchy_export_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    features, labels = blob_data(rng, [0, 1, 10, 11])
    h = build_hierarchy(features, labels, [2], seed=0, keep_graphs=True)
    path = tmp_path / "hierarchy.json"
    h.save(path, include_matrices=True)
    loaded = Hierarchy.load(path)
    assert loaded.n_levels == h.n_levels
    for a, b in zip(loaded.level_labels, h.level_labels):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(loaded.parent_maps, h.parent_maps):
        np.testing.assert_array_equal(a, b)
    # JSON float round-trip is exact for float64.
    np.testing.assert_array_equal(loaded.graphs[0].distances, h.graphs[0].distances)
    np.testing.assert_array_equal(loaded.graphs[0].adjacency, h.graphs[0].adjacency)


def test_hierarchy_load_rejects_malformed(tmp_path):
    with pytest.raises(FileFormatError):
        Hierarchy.from_json(b"not json")
    with pytest.raises(FileFormatError):
        Hierarchy.from_json(json.dumps({"format": "something-else"}).encode())
    with pytest.raises(FileFormatError):
        Hierarchy.from_json(
            json.dumps({"format": "otscale-hierarchy", "version": 99}).encode()
        )
    good = {
        "format": "otscale-hierarchy",
        "version": 1,
        "n_base": 4,
        "counts": [2, 1],
        "base_labels": [0, 0, 1, 1],
        "parent_maps": [[0, 0]],
    }
    bad_counts = dict(good, counts=[2, 2])
    with pytest.raises(FileFormatError):
        Hierarchy.from_json(json.dumps(bad_counts).encode())
    gap = dict(good, counts=[2, 3], parent_maps=[[0, 2]])
    with pytest.raises(FileFormatError):
        Hierarchy.from_json(json.dumps(gap).encode())


def test_schedule_must_decrease():
    rng = np.random.default_rng(2)
    features, labels = blob_data(rng, [0, 1, 10, 11])
    with pytest.raises(InvalidScheduleError):
        build_hierarchy(features, labels, [4], seed=0)
    with pytest.raises(InvalidScheduleError):
        build_hierarchy(features, labels, [3, 3], seed=0)
    with pytest.raises(InvalidScheduleError):
        build_hierarchy(features, labels, [], seed=0)


def test_identical_features_degenerate_case():
    # All clusters share one signature: distances are all zero and the
    # graph is fallback edges only, but coarsening must still succeed.
    features = np.ones((12, 2))
    labels = np.repeat(np.arange(4), 3)
    h = build_hierarchy(features, labels, [2], seed=0)
    h.check_nesting()
    assert h.counts == [4, 2]


def test_single_feature_dimension():
    rng = np.random.default_rng(7)
    features, labels = blob_data(rng, [0.0, 4.0, 8.0])
    h = build_hierarchy(features, labels, [2], seed=1)
    h.check_nesting()
    assert h.counts == [3, 2]
