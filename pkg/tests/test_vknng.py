"""Neighbor-selection and graph-construction tests.

Neighbor selection is checked against exhaustive enumeration of all 2^N
binary indicator vectors, which is the definition of the objective it
claims to minimize.
"""

import itertools

import numpy as np
import pytest

from otscale.errors import InvalidArgumentError, InvalidDataError
from otscale.vknng import AlphaPolicy, build_adjacency, compute_alphas, select_neighbors

# Distances between three 1-D points 0, 3, 4 on the squared scale.
Z3 = np.array([[0.0, 9.0, 16.0], [9.0, 0.0, 1.0], [16.0, 1.0, 0.0]])


def objective(indicator, row, alpha):
    return float(np.dot(indicator, row - alpha))


def exhaustive_min(row, alpha):
    best = np.inf
    for bits in itertools.product((0, 1), repeat=row.shape[0]):
        best = min(best, objective(np.array(bits), row, alpha))
    return best


def test_threshold_example():
    row = np.array([0.1, 0.5, 0.9])
    np.testing.assert_array_equal(select_neighbors(row, 0.5), [1, 0, 0])


def test_selection_minimizes_objective():
    rng = np.random.default_rng(17)
    for _ in range(80):
        n = int(rng.integers(1, 13))
        row = rng.uniform(0.0, 2.0, size=n)
        if rng.random() < 0.3:
            # Force threshold ties to hit the exclusion rule.
            row[rng.integers(n)] = 1.0
        alpha = 1.0
        picked = select_neighbors(row, alpha)
        assert objective(picked, row, alpha) == pytest.approx(exhaustive_min(row, alpha), abs=1e-12)
        # Ties at the threshold stay out.
        assert not np.any(picked[row >= alpha])


def test_self_index_excluded():
    row = np.array([0.0, 0.2, 0.8])
    np.testing.assert_array_equal(select_neighbors(row, 0.5, self_index=0), [0, 1, 0])


def test_select_neighbors_validation():
    with pytest.raises(InvalidDataError):
        select_neighbors(np.array([-0.1, 0.2]), 0.5)
    with pytest.raises(InvalidDataError):
        select_neighbors(np.array([np.nan, 0.2]), 0.5)
    with pytest.raises(InvalidDataError):
        select_neighbors(np.array([0.1, 0.2]), float("nan"))
    with pytest.raises(InvalidArgumentError):
        select_neighbors(np.zeros((2, 2)), 0.5)
    with pytest.raises(InvalidArgumentError):
        select_neighbors(np.array([0.1]), 0.5, self_index=3)


def test_order_statistic_alphas():
    # Row 0 of |i - j| has off-diagonal distances 1..7; with N=8 the
    # budget index is ceil(log2 8) + 1 = 4, so alpha is the 4th smallest.
    n = 8
    Z = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    alphas = compute_alphas(Z)
    assert alphas[0] == 4.0
    off = Z[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    np.testing.assert_array_equal(alphas, np.sort(off, axis=1)[:, 3])


def test_order_statistic_clamps_small_graphs():
    Z = np.array([[0.0, 2.5], [2.5, 0.0]])
    # N=2 clamps the budget index to 1: alpha is the only off-diagonal.
    np.testing.assert_array_equal(compute_alphas(Z), [2.5, 2.5])


def test_fixed_k_selects_k_neighbors():
    rng = np.random.default_rng(5)
    n = 9
    D = rng.uniform(1.0, 10.0, size=(n, n))
    Z = (D + D.T) / 2
    np.fill_diagonal(Z, 0.0)
    for k in (1, 3, 7):
        alphas = compute_alphas(Z, AlphaPolicy(kind="fixed-k", k=k))
        for i in range(n):
            picked = select_neighbors(Z[i], alphas[i], self_index=i)
            assert picked.sum() == min(k, n - 1)


def test_fixed_k_saturates():
    alphas = compute_alphas(Z3, AlphaPolicy(kind="fixed-k", k=5))
    assert np.all(np.isinf(alphas))


def test_mean_distance_policy():
    alphas = compute_alphas(Z3, AlphaPolicy(kind="mean-distance"))
    np.testing.assert_allclose(alphas, [12.5, 5.0, 8.5])


def test_policy_validation():
    with pytest.raises(InvalidArgumentError):
        AlphaPolicy(kind="knn")
    with pytest.raises(InvalidArgumentError):
        AlphaPolicy(kind="fixed-k")
    with pytest.raises(InvalidArgumentError):
        AlphaPolicy(kind="fixed-k", k=0)
    with pytest.raises(InvalidArgumentError):
        AlphaPolicy(kind="mean-distance", k=2)
    with pytest.raises(InvalidArgumentError):
        compute_alphas(np.zeros((1, 1)))
    with pytest.raises(InvalidDataError):
        compute_alphas(np.full((3, 3), -1.0))


def test_adjacency_generous_threshold_completes_graph():
    A = build_adjacency(Z3, np.full(3, 20.0))
    assert np.all((A > 0) == ~np.eye(3, dtype=bool))


def test_adjacency_strict_threshold():
    # With alpha 10 everywhere the 0-2 pair (distance 16) stays out.
    A = build_adjacency(Z3, np.full(3, 10.0))
    expected_edges = np.array(
        [[False, True, False], [True, False, True], [False, True, False]]
    )
    assert np.array_equal(A > 0, expected_edges)


def test_gaussian_weights_use_median_bandwidth():
    # Selected edge distances are {9, 1}, so sigma = 5.
    A = build_adjacency(Z3, np.full(3, 10.0))
    assert A[0, 1] == pytest.approx(np.exp(-81.0 / 50.0))
    assert A[1, 2] == pytest.approx(np.exp(-1.0 / 50.0))


def test_uniform_kernel():
    A = build_adjacency(Z3, np.full(3, 10.0), kernel="uniform")
    assert set(np.unique(A)) == {0.0, 1.0}


def test_literal_distance_mode():
    A = build_adjacency(Z3, np.full(3, 10.0), weight_mode="literal-distance")
    assert A[0, 1] == 9.0
    assert A[1, 2] == 1.0
    assert A[0, 2] == 0.0


def test_fallback_edge_for_isolated_nodes():
    # Nothing clears the threshold, so every node falls back to its
    # nearest neighbor and weights default to 1.
    A = build_adjacency(Z3, np.zeros(3))
    assert np.array_equal(A, A.T)
    assert np.all(A.sum(axis=1) >= 1)
    assert set(np.unique(A)) <= {0.0, 1.0}


def test_zero_sigma_falls_back_to_uniform():
    Z = np.array([[0.0, 0.0, 5.0], [0.0, 0.0, 5.0], [5.0, 5.0, 0.0]])
    A = build_adjacency(Z, np.array([1.0, 1.0, 1.0]))
    # Only the 0-1 edge (distance 0) is selected: sigma is 0, weights 1.
    assert A[0, 1] == 1.0
    # Node 2 is attached through its fallback edge.
    assert A[2].sum() >= 1.0


def test_adjacency_invariants_random():
    rng = np.random.default_rng(29)
    for _ in range(30):
        n = int(rng.integers(2, 25))
        D = rng.uniform(0.0, 4.0, size=(n, n))
        Z = (D + D.T) / 2
        np.fill_diagonal(Z, 0.0)
        A = build_adjacency(Z, compute_alphas(Z))
        assert np.array_equal(A, A.T)
        assert np.all(np.diag(A) == 0.0)
        assert np.all((A > 0).sum(axis=1) >= 1)
        assert np.all(A >= 0.0)


def test_adjacency_validation():
    with pytest.raises(InvalidArgumentError):
        build_adjacency(Z3, np.zeros(2))
    with pytest.raises(InvalidDataError):
        build_adjacency(Z3, np.array([1.0, np.nan, 1.0]))
    with pytest.raises(InvalidArgumentError):
        build_adjacency(Z3, np.zeros(3), kernel="rbf")
    with pytest.raises(InvalidArgumentError):
        build_adjacency(Z3, np.zeros(3), weight_mode="raw")
