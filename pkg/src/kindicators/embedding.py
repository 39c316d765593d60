"""Spectral-embedding front end: kNN similarity graph and normalized-Laplacian eigenvectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EigSolverError,
    EmbeddedData,
    IsolatedVertexError,
    _readonly,
    fix_column_signs,
    validate_embedding,
)

WEIGHT_SCHEMES = ("binary", "gaussian")


@dataclass(eq=False)
class SimilarityGraph:
    """Symmetric nonnegative weight matrix with zero diagonal."""

    weights: np.ndarray
    knn: int

    def __post_init__(self):
        self.weights = _readonly(self.weights)
        n, m = self.weights.shape
        if n != m:
            raise ValueError("weight matrix must be square")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if np.max(np.abs(self.weights - self.weights.T)) > 0:
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(self.weights) != 0):
            raise ValueError("diagonal must be zero")


def knn_graph(data, knn: int, weight: str = "binary") -> SimilarityGraph:
    """Symmetrized k-nearest-neighbor graph under Euclidean distance.

    An edge connects i and j when either is among the other's `knn` nearest
    neighbors (self excluded; distance ties resolved toward the lower index).
    The default weight is 0/1; "gaussian" rescales edges by
    exp(-d^2 / (2 h^2)) with bandwidth h equal to the median neighbor
    distance.
    """
    x = np.asarray(data, dtype=float)
    n = x.shape[0]
    if not 1 <= knn < n:
        raise ValueError(f"need 1 <= knn < n, got knn={knn}, n={n}")
    if weight not in WEIGHT_SCHEMES:
        raise ValueError(f"weight must be one of {WEIGHT_SCHEMES}")
    d2 = (
        (x**2).sum(axis=1)[:, None]
        - 2.0 * x @ x.T
        + (x**2).sum(axis=1)[None, :]
    )
    d2 = np.maximum(0.5 * (d2 + d2.T), 0.0)
    np.fill_diagonal(d2, np.inf)
    # Stable sort keeps the original (lower-index-first) order on ties.
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :knn]
    adj = np.zeros((n, n))
    adj[np.repeat(np.arange(n), knn), neighbors.ravel()] = 1.0
    w = np.maximum(adj, adj.T)
    if weight == "gaussian":
        bandwidth = float(np.median(np.sqrt(d2[np.arange(n)[:, None], neighbors])))
        w = np.where(w > 0, np.exp(-d2 / (2.0 * bandwidth**2)), 0.0)
    return SimilarityGraph(w, knn)


def spectral_embed(graph: SimilarityGraph, k: int, row_normalize: bool = False) -> EmbeddedData:
    """Eigenvectors of the k smallest eigenvalues of the symmetric normalized Laplacian.

    Forms L = I - D^(-1/2) W D^(-1/2) and returns its k bottom eigenvectors
    with a deterministic column-sign convention. With `row_normalize`, rows
    are rescaled to unit norm and the columns re-orthonormalized. The output
    always satisfies the embedded-data contract.

    Raises IsolatedVertexError for zero-degree vertices and EigSolverError if
    the eigendecomposition fails.
    """
    w = graph.weights
    n = w.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    degrees = w.sum(axis=1)
    isolated = np.flatnonzero(degrees <= 0)
    if isolated.size:
        raise IsolatedVertexError(isolated[0])
    inv_sqrt = 1.0 / np.sqrt(degrees)
    laplacian = np.eye(n) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    laplacian = 0.5 * (laplacian + laplacian.T)
    try:
        _, vectors = np.linalg.eigh(laplacian)
    except np.linalg.LinAlgError as exc:
        raise EigSolverError(f"eigendecomposition failed: {exc}") from exc
    u = fix_column_signs(vectors[:, :k])
    if row_normalize:
        norms = np.linalg.norm(u, axis=1)
        u = u / np.maximum(norms, np.finfo(float).tiny)[:, None]
    return validate_embedding(u)


def laplacian_eigenvalues(graph: SimilarityGraph) -> np.ndarray:
    """All eigenvalues of the symmetric normalized Laplacian, ascending."""
    w = graph.weights
    degrees = w.sum(axis=1)
    isolated = np.flatnonzero(degrees <= 0)
    if isolated.size:
        raise IsolatedVertexError(isolated[0])
    inv_sqrt = 1.0 / np.sqrt(degrees)
    laplacian = np.eye(w.shape[0]) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    return np.linalg.eigvalsh(0.5 * (laplacian + laplacian.T))
