"""Metric tests.

Expected boundary-respect values are derived independently with plain
python sets before being asserted against the implementation.
"""

import numpy as np
import pytest

from otscale.errors import InvalidArgumentError
from otscale.metrics import (
    clusterwise_color_std,
    overlap_cardinality,
    rsc,
    rsc_report,
    write_metrics_csv,
)
from otscale.pipeline import Hierarchy


def set_oracle_rsc(fine_sets, coarse):
    """Same score computed with python sets, no numpy involved."""
    total = 0
    for s in fine_sets:
        if s & coarse:
            total += len(s | coarse)
    return total / len(coarse)


def labels_from_sets(fine_sets, n):
    labels = np.empty(n, np.int64)
    for c, s in enumerate(fine_sets):
        labels[sorted(s)] = c
    return labels


def test_overlap_cardinality_cases():
    assert overlap_cardinality([1, 2], [3, 4]) == 0
    assert overlap_cardinality([1, 2, 3], [1, 2, 3]) == 3
    assert overlap_cardinality([1, 2, 3], [3, 4]) == 4
    assert overlap_cardinality([3, 4], [1, 2, 3]) == 4


def test_overlap_cardinality_symmetric_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.choice(30, size=rng.integers(1, 12), replace=False)
        b = rng.choice(30, size=rng.integers(1, 12), replace=False)
        got = overlap_cardinality(a, b)
        assert got == overlap_cardinality(b, a)
        sa, sb = set(a.tolist()), set(b.tolist())
        assert got == (len(sa | sb) if sa & sb else 0)


def test_rsc_single_fine_cluster_is_one():
    fine_sets = [{0, 1, 2}, {3, 4, 5}]
    labels = labels_from_sets(fine_sets, 6)
    coarse = {0, 1, 2}
    assert set_oracle_rsc(fine_sets, coarse) == 1.0
    assert rsc(labels, sorted(coarse)) == 1.0


def test_rsc_nested_union_counts_children():
    fine_sets = [{0, 1, 2}, {3, 4, 5}]
    labels = labels_from_sets(fine_sets, 6)
    coarse = {0, 1, 2, 3, 4, 5}
    # Both fine clusters are inside the coarse one: (6 + 6) / 6 = 2.
    assert set_oracle_rsc(fine_sets, coarse) == 2.0
    assert rsc(labels, sorted(coarse)) == 2.0


def test_rsc_boundary_violation_scores_three():
    # Coarse cluster straddles both fine clusters, each union having 6
    # elements: (6 + 6) / 4 = 3, higher than the nested analogue's 2.
    fine_sets = [{0, 1, 2, 3}, {4, 5, 6, 7}]
    labels = labels_from_sets(fine_sets, 8)
    coarse = {2, 3, 4, 5}
    assert set_oracle_rsc(fine_sets, coarse) == 3.0
    assert rsc(labels, sorted(coarse)) == 3.0


def test_rsc_validation():
    labels = np.zeros(4, np.int64)
    with pytest.raises(InvalidArgumentError):
        rsc(labels, [])
    with pytest.raises(InvalidArgumentError):
        rsc(labels, [7])
    with pytest.raises(InvalidArgumentError):
        rsc(np.zeros((2, 2), np.int64), [0])


def test_rsc_report_nested_hierarchy():
    fine = np.array([0, 0, 1, 1, 2, 2, 3, 3])
    coarse = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    report = rsc_report(fine, coarse)
    np.testing.assert_array_equal(report.literal, [2.0, 2.0])
    np.testing.assert_array_equal(report.normalized, [1.0, 1.0])
    assert report.mean_literal == 2.0
    assert report.mean_normalized == 1.0


def test_rsc_report_violation():
    fine = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    coarse = np.array([0, 0, 1, 1, 1, 1, 2, 2])
    report = rsc_report(fine, coarse)
    # Middle coarse cluster straddles the fine boundary.
    assert report.literal[1] == 3.0
    assert report.normalized[1] == 1.5
    assert np.all(report.literal >= 1.0)


def test_color_std_constant_clusters():
    labels = np.array([0, 0, 1, 1])
    colors = np.array([[3.0, 7.0], [3.0, 7.0], [9.0, 2.0], [9.0, 2.0]])
    assert clusterwise_color_std(labels, colors) == 0.0


def test_color_std_two_point_cluster():
    labels = np.zeros(2, np.int64)
    colors = np.array([[0.0], [10.0]])
    assert clusterwise_color_std(labels, colors) == 5.0


def test_color_std_unweighted_cluster_mean():
    # Cluster stds 2 and 4 average to 3 despite different sizes.
    labels = np.array([0, 0, 1, 1, 1, 1])
    colors = np.array([[0.0], [4.0], [0.0], [8.0], [0.0], [8.0]])
    assert clusterwise_color_std(labels[:2], colors[:2]) == 2.0
    assert clusterwise_color_std(labels[2:] - 1, colors[2:]) == 4.0
    assert clusterwise_color_std(labels, colors) == 3.0


def test_color_std_invariant_to_relabeling():
    rng = np.random.default_rng(11)
    labels = rng.integers(0, 4, size=40)
    colors = rng.uniform(0, 255, size=(40, 3))
    base = clusterwise_color_std(labels, colors)
    perm = rng.permutation(40)
    assert clusterwise_color_std(labels[perm], colors[perm]) == pytest.approx(base, abs=1e-12)
    relabel = np.array([2, 0, 3, 1])[labels]
    assert clusterwise_color_std(relabel, colors) == pytest.approx(base, abs=1e-12)


def test_color_std_validation():
    with pytest.raises(InvalidArgumentError):
        clusterwise_color_std(np.array([], dtype=np.int64), np.zeros((0, 3)))
    with pytest.raises(InvalidArgumentError):
        clusterwise_color_std(np.zeros(3, np.int64), np.zeros((2, 3)))


def test_metrics_csv(tmp_path):
    levels = [
        np.array([0, 0, 1, 1, 2, 2, 3, 3]),
        np.array([0, 0, 0, 0, 1, 1, 1, 1]),
    ]
    pmaps = [np.array([0, 0, 1, 1])]
    h = Hierarchy(level_labels=levels, parent_maps=pmaps)
    colors = np.arange(8, dtype=np.float64)[:, None]
    path = tmp_path / "metrics.csv"
    write_metrics_csv(path, h, colors=colors)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "level,n_clusters,rsc_literal_mean,rsc_normalized_mean,color_std"
    assert lines[1].startswith("0,4,,,")
    assert lines[2].startswith("1,2,2.0,1.0,")
    # Identical runs must serialize identically.
    path2 = tmp_path / "metrics2.csv"
    write_metrics_csv(path2, h, colors=colors)
    assert path.read_bytes() == path2.read_bytes()
