"""Exact optimal transport between cluster signatures.

Distances between clusters are the minimum cost of moving one
signature's mass distribution onto another's, with cost equal to squared
Euclidean distance between sub-cluster centroids. The solver is a primal
network simplex on the dense transportation polytope, so results are
exact vertex solutions rather than entropic approximations.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import accel
from .errors import (
    InfeasibleMeasuresError,
    InvalidArgumentError,
    InvalidDataError,
    NumericalFailureError,
)

__all__ = [
    "TransportResult",
    "cost_matrix",
    "solve_transport",
    "ot_distance",
    "pairwise_distances",
]

# Masses this small are treated as numerical noise and pruned.
_MASS_EPS = 1e-12
_MASS_MISMATCH_TOL = 1e-6


@dataclass(frozen=True)
class TransportResult:
    """Optimal plan and value for one transport problem.

    plan[i, j] is the mass moved from source atom i to sink atom j;
    row_duals/col_duals are the simplex potentials (u, v) satisfying
    u_i + v_j <= cost_ij with equality on basic cells.
    """

    value: float
    plan: np.ndarray
    row_duals: np.ndarray
    col_duals: np.ndarray


def cost_matrix(a_centroids, b_centroids):
    """Pairwise squared Euclidean distances, (m, dim) x (n, dim) -> (m, n)."""
    a = np.ascontiguousarray(a_centroids, dtype=np.float64)
    b = np.ascontiguousarray(b_centroids, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise InvalidArgumentError("centroid arrays must be 2-D")
    if a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(
            f"centroid dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidDataError("centroids contain non-finite values")
    diff = a[:, None, :] - b[None, :, :]
    return np.ascontiguousarray((diff * diff).sum(axis=2))


def _validate_measure(w, name):
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(w)):
        raise InvalidDataError(f"{name} contains non-finite values")
    if np.any(w < 0.0):
        raise InvalidDataError(f"{name} contains negative mass")
    return w


def solve_transport(cost, supplies, demands):
    """Solve one transportation problem exactly.

    Atoms with mass below 1e-12 are pruned and the rest renormalized;
    the returned plan still has the full input shape with zero rows and
    columns for pruned atoms. Total masses must agree within 1e-6.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    supplies = _validate_measure(supplies, "supplies")
    demands = _validate_measure(demands, "demands")
    if cost.ndim != 2 or cost.shape != (supplies.shape[0], demands.shape[0]):
        raise InvalidArgumentError(
            f"cost must have shape ({supplies.shape[0]}, {demands.shape[0]}), got {cost.shape}"
        )
    if not np.all(np.isfinite(cost)):
        raise InvalidDataError("cost matrix contains non-finite values")
    if np.any(cost < 0.0):
        raise InvalidDataError("cost matrix contains negative entries")

    sa, sb = supplies.sum(), demands.sum()
    if sa <= 0.0 or sb <= 0.0:
        raise InfeasibleMeasuresError("measures must carry positive total mass")
    if abs(sa - sb) > _MASS_MISMATCH_TOL:
        raise InfeasibleMeasuresError(
            f"total masses differ: {sa!r} vs {sb!r} (tolerance {_MASS_MISMATCH_TOL})"
        )

    keep_r = np.flatnonzero(supplies > _MASS_EPS)
    keep_c = np.flatnonzero(demands > _MASS_EPS)
    if keep_r.size == 0 or keep_c.size == 0:
        raise InfeasibleMeasuresError("all mass fell below the pruning threshold")
    a = supplies[keep_r]
    b = demands[keep_c]
    a = a / a.sum()
    b = b / b.sum()
    sub_cost = np.ascontiguousarray(cost[np.ix_(keep_r, keep_c)])

    m, n = sub_cost.shape
    max_iter = 1000 * (m + n)
    rows, cols, flows, value, u, v, status = accel.transport_solve(sub_cost, a, b, max_iter)
    if status != 0:
        raise NumericalFailureError(
            f"transport solver hit the iteration cap ({max_iter}) on a {m}x{n} problem"
        )

    plan = np.zeros(cost.shape, np.float64)
    # Basic flows can carry tiny negative noise after degenerate pivots.
    plan[keep_r[rows], keep_c[cols]] = np.maximum(flows, 0.0)
    row_duals = np.zeros(supplies.shape[0], np.float64)
    col_duals = np.zeros(demands.shape[0], np.float64)
    row_duals[keep_r] = u
    col_duals[keep_c] = v
    return TransportResult(value=float(value), plan=plan, row_duals=row_duals, col_duals=col_duals)


def ot_distance(a, b):
    """Exact transport cost between two signatures (squared-distance scale)."""
    cost = cost_matrix(a.centroids, b.centroids)
    return solve_transport(cost, a.masses, b.masses).value


def _pairwise_args(signatures):
    n = len(signatures)
    dims = {s.dim for s in signatures}
    if len(dims) != 1:
        raise InvalidArgumentError(f"signatures have mixed dimensions: {sorted(dims)}")
    dim = dims.pop()
    kmax = max(s.size for s in signatures)
    centroids = np.zeros((n, kmax, dim), np.float64)
    masses = np.zeros((n, kmax), np.float64)
    counts = np.empty(n, np.int64)
    for i, s in enumerate(signatures):
        counts[i] = s.size
        centroids[i, : s.size] = s.centroids
        masses[i, : s.size] = s.masses
    return centroids, masses, counts, dim


def pairwise_distances(signatures, n_jobs=1):
    """Symmetric matrix of exact transport distances between signatures.

    With n_jobs > 1, rows of the upper triangle are solved on a thread
    pool in interleaved stripes; the solver kernel releases the GIL, so
    this scales on the compiled backend.
    """
    if len(signatures) < 2:
        raise InvalidArgumentError("need at least two signatures")
    if not isinstance(n_jobs, (int, np.integer)) or n_jobs < 1:
        raise InvalidArgumentError(f"n_jobs must be a positive integer, got {n_jobs!r}")
    centroids, masses, counts, dim = _pairwise_args(signatures)
    n = len(signatures)
    kmax = int(counts.max())
    max_iter = 1000 * (2 * kmax)
    out = np.zeros((n, n), np.float64)

    n_jobs = int(min(n_jobs, n))
    if n_jobs == 1:
        failures = accel.transport_pairwise(centroids, masses, counts, dim, 0, n, 1, max_iter, out)
    else:
        def run(start):
            return accel.transport_pairwise(
                centroids, masses, counts, dim, start, n, n_jobs, max_iter, out
            )

        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            failures = sum(pool.map(run, range(n_jobs)))
    if failures:
        raise NumericalFailureError(
            f"transport solver hit the iteration cap on {failures} signature pair(s)"
        )

    upper = np.triu_indices(n, 1)
    out[(upper[1], upper[0])] = out[upper]
    np.fill_diagonal(out, 0.0)
    return out
