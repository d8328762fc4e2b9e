"""Normalized-cut spectral clustering on a weighted adjacency matrix.

Uses the symmetric normalized Laplacian L = I - D^{-1/2} A D^{-1/2},
whose k smallest eigenvectors relax the k-way normalized-cut objective.
Row-normalizing the spectral embedding and running k-means on it rounds
the relaxation back to a partition.
"""

import numpy as np

from .errors import InvalidArgumentError, InvalidGraphError, NumericalFailureError
from .features import kmeans

__all__ = ["spectral_embedding", "normalized_cut"]


def _validate_adjacency(A):
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"adjacency must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidGraphError("adjacency contains non-finite values")
    if np.any(A < 0.0):
        raise InvalidGraphError("adjacency contains negative weights")
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12):
        raise InvalidGraphError("adjacency is not symmetric")
    if np.any(np.diag(A) != 0.0):
        raise InvalidGraphError("adjacency has self-loops")
    return (A + A.T) / 2.0


def spectral_embedding(A, k):
    """k smallest Laplacian eigenpairs, rows ready for clustering.

    Returns (embedding, eigenvalues): the (n, k) matrix of eigenvectors
    of the symmetric normalized Laplacian for its k smallest
    eigenvalues, and those eigenvalues in ascending order. Eigenvalues
    of this Laplacian live in [0, 2]; values outside by more than
    numerical noise raise, then tiny excursions are clamped.
    """
    A = _validate_adjacency(A)
    n = A.shape[0]
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidArgumentError(f"k must be a positive integer, got {k!r}")
    if k > n:
        raise InvalidArgumentError(f"k={k} exceeds the number of nodes ({n})")

    degrees = A.sum(axis=1)
    if np.any(degrees <= 0.0):
        bad = int(np.flatnonzero(degrees <= 0.0)[0])
        raise InvalidGraphError(f"node {bad} is isolated (zero degree)")

    inv_sqrt = 1.0 / np.sqrt(degrees)
    L = -A * inv_sqrt[:, None] * inv_sqrt[None, :]
    np.fill_diagonal(L, 1.0)
    L = (L + L.T) / 2.0

    eigenvalues, eigenvectors = np.linalg.eigh(L)
    if eigenvalues[0] < -1e-8 or eigenvalues[-1] > 2.0 + 1e-8:
        raise NumericalFailureError("Laplacian eigenvalues left [0, 2]")
    return eigenvectors[:, :k], np.clip(eigenvalues[:k], 0.0, 2.0)


def normalized_cut(A, n_clusters, seed):
    """Partition graph nodes by rounding the spectral relaxation.

    Embeds nodes with the n_clusters smallest Laplacian eigenvectors,
    normalizes each row to unit length, and clusters rows with seeded
    k-means. Returns integer labels in 0..n_clusters-1.
    """
    A = _validate_adjacency(A)
    n = A.shape[0]
    if not isinstance(n_clusters, (int, np.integer)) or n_clusters < 1:
        raise InvalidArgumentError(f"n_clusters must be a positive integer, got {n_clusters!r}")
    if n_clusters > n:
        raise InvalidArgumentError(f"n_clusters={n_clusters} exceeds the number of nodes ({n})")
    if n_clusters == 1:
        # Degree validation still applies to keep the contract uniform.
        spectral_embedding(A, 1)
        return np.zeros(n, np.int64)

    embedding, _ = spectral_embedding(A, int(n_clusters))
    norms = np.linalg.norm(embedding, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise NumericalFailureError(f"spectral embedding row {bad} has zero norm")
    rows = embedding / norms[:, None]
    return kmeans(rows, int(n_clusters), seed=seed).assignments
