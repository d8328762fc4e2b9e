"""k-means sub-clustering and signature extraction tests.

The well-separated example is verified against an exhaustive partition
enumeration before the solver is trusted to reproduce it.
"""

import itertools

import numpy as np
import pytest

from otscale.errors import InvalidArgumentError, InvalidDataError
from otscale.features import (
    ClusterSignature,
    SubclusterCountPolicy,
    extract_signature,
    kmeans,
)


def sse_of_partition(points, labels, k):
    total = 0.0
    for c in range(k):
        members = points[labels == c]
        if members.shape[0]:
            total += ((members - members.mean(axis=0)) ** 2).sum()
    return total


def exhaustive_best_partition(points, k):
    """Global SSE optimum by enumerating every surjective labeling."""
    n = points.shape[0]
    best, best_labels = np.inf, None
    for combo in itertools.product(range(k), repeat=n):
        labels = np.array(combo)
        if len(set(combo)) != k:
            continue
        sse = sse_of_partition(points, labels, k)
        if sse < best:
            best, best_labels = sse, labels
    return best, best_labels


def test_two_well_separated_groups():
    points = np.array([[0.0], [1.0], [10.0], [11.0]])

    # Independent check that {0,1} | {10,11} really is the optimum.
    best_sse, best_labels = exhaustive_best_partition(points, 2)
    assert best_labels[0] == best_labels[1]
    assert best_labels[2] == best_labels[3]
    assert best_labels[0] != best_labels[2]
    assert best_sse == pytest.approx(1.0)

    for seed in range(5):
        sub = kmeans(points, 2, seed=seed)
        assert sub.assignments[0] == sub.assignments[1]
        assert sub.assignments[2] == sub.assignments[3]
        assert sub.assignments[0] != sub.assignments[2]
        assert sorted(sub.centroids.ravel().tolist()) == [0.5, 10.5]
        assert sub.inertia == pytest.approx(best_sse)
        assert sub.converged


def test_objective_nonincreasing():
    rng = np.random.default_rng(0)
    for trial in range(20):
        points = rng.normal(size=(int(rng.integers(5, 60)), int(rng.integers(1, 5))))
        sub = kmeans(points, int(rng.integers(1, 6)), seed=trial)
        hist = np.array(sub.inertia_history)
        assert np.all(np.diff(hist) <= 1e-9)
        assert sub.inertia == hist[-1]


def test_assignments_are_a_fixed_point():
    rng = np.random.default_rng(8)
    points = rng.normal(size=(40, 3))
    sub = kmeans(points, 4, seed=1)
    assert sub.converged
    diff = points[:, None, :] - sub.centroids[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    np.testing.assert_array_equal(d2.argmin(axis=1), sub.assignments)


def test_deterministic_per_seed():
    rng = np.random.default_rng(2)
    points = rng.normal(size=(30, 2))
    a = kmeans(points, 3, seed=9)
    b = kmeans(points, 3, seed=9)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    np.testing.assert_array_equal(a.centroids, b.centroids)


def test_empty_cluster_repair():
    # Four coincident points force duplicate initial centers, so one
    # cluster starts empty and must be repaired.
    points = np.array([[0.0], [0.0], [0.0], [0.0], [100.0]])
    for seed in range(10):
        sub = kmeans(points, 3, seed=seed)
        assert np.all(sub.sizes >= 1)
        assert sub.sizes.sum() == 5


def test_kmeans_validation():
    points = np.zeros((3, 2))
    with pytest.raises(InvalidArgumentError):
        kmeans(points, 0, seed=0)
    with pytest.raises(InvalidArgumentError):
        kmeans(points, 4, seed=0)
    with pytest.raises(InvalidArgumentError):
        kmeans(points, 1.5, seed=0)
    with pytest.raises(InvalidDataError):
        kmeans(np.array([[np.nan]]), 1, seed=0)
    with pytest.raises(InvalidArgumentError):
        kmeans(np.zeros(3), 1, seed=0)


def test_policy_counts():
    policy = SubclusterCountPolicy(kmax=8)
    assert policy.count_for(100, 100) == 8
    assert policy.count_for(5, 5) == 5
    assert policy.count_for(100, 3) == 3
    assert policy.count_for(1, 1) == 1
    with pytest.raises(InvalidArgumentError):
        SubclusterCountPolicy(kmax=0)


def test_signature_masses_are_member_fractions():
    rng = np.random.default_rng(4)
    features = rng.normal(size=(50, 3))
    nodes = np.arange(20)
    sig = extract_signature(nodes, features, SubclusterCountPolicy(kmax=4), seed=3)
    assert sig.size == 4
    assert sig.dim == 3
    assert np.all(sig.masses > 0)
    assert sig.masses.sum() == pytest.approx(1.0, abs=1e-12)
    # Masses are multiples of 1/20.
    np.testing.assert_allclose(sig.masses * 20, np.round(sig.masses * 20), atol=1e-9)


def test_signature_identical_rows_collapse():
    features = np.tile([[2.0, 3.0]], (10, 1))
    sig = extract_signature(np.arange(10), features, SubclusterCountPolicy(kmax=8), seed=0)
    assert sig.size == 1
    np.testing.assert_array_equal(sig.centroids, [[2.0, 3.0]])
    np.testing.assert_array_equal(sig.masses, [1.0])


def test_signature_medoid_rows_are_members():
    rng = np.random.default_rng(12)
    features = rng.normal(size=(30, 2))
    sig = extract_signature(
        np.arange(30), features, SubclusterCountPolicy(kmax=5), seed=1, representative="medoid"
    )
    rows = {tuple(row) for row in features}
    for c in sig.centroids:
        assert tuple(c) in rows


def test_signature_validation():
    features = np.zeros((4, 2))
    with pytest.raises(InvalidArgumentError):
        extract_signature(np.array([], dtype=int), features, seed=0)
    with pytest.raises(InvalidArgumentError):
        extract_signature([0, 1], features, seed=0, representative="mode")
    with pytest.raises(InvalidArgumentError):
        ClusterSignature(centroids=np.zeros((2, 2)), masses=np.array([0.5, 0.25]))
    with pytest.raises(InvalidArgumentError):
        ClusterSignature(centroids=np.zeros((2, 2)), masses=np.array([1.0, 0.0]))
    with pytest.raises(InvalidDataError):
        ClusterSignature(centroids=np.full((1, 2), np.nan), masses=np.array([1.0]))
