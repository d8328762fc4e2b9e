"""Variable-k nearest-neighbor graph over a cluster distance matrix.

Each node i gets its own distance budget alpha_i. Selecting the
neighbor set that minimizes sum_j a_j * (z_ij - alpha_i) over binary
a_j means taking exactly the neighbors with z_ij strictly below
alpha_i: ties at the threshold contribute zero and are excluded. The
directed selections are OR-symmetrized, rows left with no edge fall
back to their single nearest neighbor, and edge weights come from a
Gaussian kernel on the distances (or the raw distances on request).
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError

__all__ = [
    "AlphaPolicy",
    "select_neighbors",
    "compute_alphas",
    "build_adjacency",
]

_POLICY_KINDS = ("order-statistic", "fixed-k", "mean-distance")


@dataclass(frozen=True)
class AlphaPolicy:
    """How per-node thresholds are derived from the distance matrix.

    order-statistic (default): alpha_i is the m-th smallest off-diagonal
    distance in row i with m = ceil(log2 N) + 1, clamped to [1, N-1],
    so the neighborhood budget grows slowly with graph size.
    fixed-k: alpha_i is the (k+1)-th smallest off-diagonal distance
    (infinite when k >= N-1), selecting exactly k neighbors when
    distances are distinct.
    mean-distance: alpha_i is the mean off-diagonal distance of row i.
    """

    kind: str = "order-statistic"
    k: int | None = None

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise InvalidArgumentError(
                f"unknown alpha policy {self.kind!r}, expected one of {_POLICY_KINDS}"
            )
        if self.kind == "fixed-k":
            if not isinstance(self.k, (int, np.integer)) or self.k < 1:
                raise InvalidArgumentError("fixed-k policy needs an integer k >= 1")
        elif self.k is not None:
            raise InvalidArgumentError(f"policy {self.kind!r} takes no k")


def select_neighbors(row, alpha, self_index=None):
    """Binary neighbor indicator for one node's distance row.

    Returns a_j = 1 exactly where row[j] < alpha; entries equal to the
    threshold are excluded because they cannot reduce the objective.
    self_index, when given, is forced to 0.
    """
    row = np.ascontiguousarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise InvalidArgumentError("row must be 1-D")
    if not np.all(np.isfinite(row)):
        raise InvalidDataError("distance row contains non-finite values")
    if np.any(row < 0.0):
        raise InvalidDataError("distance row contains negative values")
    if math.isnan(alpha):
        raise InvalidDataError("alpha is NaN")
    indicator = (row < alpha).astype(np.int64)
    if self_index is not None:
        if not 0 <= self_index < row.shape[0]:
            raise InvalidArgumentError(f"self_index {self_index} out of range")
        indicator[self_index] = 0
    return indicator


def _validate_distance_matrix(Z):
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise InvalidArgumentError(f"distance matrix must be square, got shape {Z.shape}")
    if Z.shape[0] < 2:
        raise InvalidArgumentError("need at least two nodes to build a graph")
    if not np.all(np.isfinite(Z)):
        raise InvalidDataError("distance matrix contains non-finite values")
    if np.any(Z < 0.0):
        raise InvalidDataError("distance matrix contains negative values")
    return Z


def _off_diagonal(Z):
    n = Z.shape[0]
    return Z[~np.eye(n, dtype=bool)].reshape(n, n - 1)


def compute_alphas(Z, policy=None):
    """Per-node thresholds for the given distance matrix."""
    if policy is None:
        policy = AlphaPolicy()
    Z = _validate_distance_matrix(Z)
    n = Z.shape[0]
    off = _off_diagonal(Z)
    if policy.kind == "order-statistic":
        m = math.ceil(math.log2(n)) + 1
        m = min(max(m, 1), n - 1)
        return np.partition(off, m - 1, axis=1)[:, m - 1].copy()
    if policy.kind == "fixed-k":
        if policy.k >= n - 1:
            return np.full(n, np.inf)
        return np.partition(off, policy.k, axis=1)[:, policy.k].copy()
    return off.mean(axis=1)


def build_adjacency(Z, alphas, kernel="gaussian", weight_mode="kernel"):
    """Weighted symmetric adjacency from distances and thresholds.

    Directed threshold selections are OR-symmetrized; any node still
    isolated gets one edge to its nearest neighbor, so minimum degree
    is at least 1. With weight_mode="kernel" edges carry
    exp(-z^2 / (2 sigma^2)) where sigma is the median distance over the
    threshold-selected edges (weight 1 everywhere when that set is
    empty or sigma is 0); the exponent is capped so a selected edge
    never rounds to weight 0. kernel="uniform" puts 1 on every edge. With
    weight_mode="literal-distance" edges carry the raw distances; note
    small weights then mean similar nodes, and an edge at distance 0
    vanishes from the matrix.
    """
    Z = _validate_distance_matrix(Z)
    n = Z.shape[0]
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    if alphas.shape != (n,):
        raise InvalidArgumentError(f"alphas must have shape ({n},), got {alphas.shape}")
    if np.any(np.isnan(alphas)):
        raise InvalidDataError("alphas contain NaN")
    if kernel not in ("gaussian", "uniform"):
        raise InvalidArgumentError(f"kernel must be 'gaussian' or 'uniform', got {kernel!r}")
    if weight_mode not in ("kernel", "literal-distance"):
        raise InvalidArgumentError(
            f"weight_mode must be 'kernel' or 'literal-distance', got {weight_mode!r}"
        )

    selected = Z < alphas[:, None]
    np.fill_diagonal(selected, False)
    edges = selected | selected.T

    # Bandwidth comes from the threshold-selected edges only, so the
    # fallback edges added next cannot shift it.
    sel_upper = np.triu(edges, 1)
    sel_dists = Z[sel_upper]

    isolated = np.flatnonzero(edges.sum(axis=1) == 0)
    if isolated.size:
        masked = Z.copy()
        np.fill_diagonal(masked, np.inf)
        nearest = masked[isolated].argmin(axis=1)
        edges[isolated, nearest] = True
        edges[nearest, isolated] = True

    if weight_mode == "literal-distance":
        weights = Z
    elif kernel == "uniform":
        weights = np.ones_like(Z)
    else:
        sigma = float(np.median(sel_dists)) if sel_dists.size else 0.0
        if sigma > 0.0:
            # Exponent capped so a selected edge never underflows to an
            # exact zero weight, which would disconnect its endpoints.
            exponent = np.minimum((Z * Z) / (2.0 * sigma * sigma), 700.0)
            weights = np.exp(-exponent)
        else:
            weights = np.ones_like(Z)

    A = np.where(edges, weights, 0.0)
    np.fill_diagonal(A, 0.0)
    return A
