"""Closed-form projections and subspace distances for column-orthonormal bases.

All distances go through k x k Gram matrices; nothing here ever materializes
an n x n projector, so memory stays linear in the number of objects.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateProjectionWarning,
    EmbeddedData,
    RelaxedAssignment,
    _readonly,
)

# Below this singular value the Procrustes projection is treated as non-unique.
DEGENERATE_SV_TOL = 1e-12


@dataclass(eq=False)
class RotatedBasis:
    """An orthonormal basis U = B R obtained by rotating a reference basis B."""

    matrix: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        self.matrix = _readonly(self.matrix)
        self.rotation = _readonly(self.rotation)
        n, k = self.matrix.shape
        if self.rotation.shape != (k, k):
            raise ValueError("rotation must be k x k")
        if np.max(np.abs(self.matrix.T @ self.matrix - np.eye(k))) > 1e-10:
            raise ValueError("rotated basis columns must be orthonormal")
        if np.max(np.abs(self.rotation.T @ self.rotation - np.eye(k))) > 1e-10:
            raise ValueError("rotation must be orthogonal")


def project_box(u) -> RelaxedAssignment:
    """Project entrywise onto the box [0, 1].

    Equals max(0, .) whenever entries never exceed 1, which holds for any
    column-orthonormal input; the upper clamp makes box membership
    unconditional for arbitrary callers.
    """
    return RelaxedAssignment(np.clip(np.asarray(u, dtype=float), 0.0, 1.0))


def procrustes_rotation(target, basis_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal k x k rotation R minimizing ||B R - target||_F for orthonormal B.

    Returns (R, sigma) where sigma holds the singular values of B' target in
    descending order; their sum is the nuclear norm used for objective
    accounting, and a tiny sigma[-1] signals a (near-)non-unique projection.
    """
    p, sigma, qt = np.linalg.svd(np.asarray(basis_matrix).T @ np.asarray(target))
    return p @ qt, sigma


def procrustes_project(target, basis: EmbeddedData) -> tuple[RotatedBasis, float]:
    """Project `target` onto the set of rotations of `basis`.

    Returns the nearest rotated basis and the nuclear norm of basis' target.
    Warns with DegenerateProjectionWarning when the projection is nearly
    non-unique (smallest singular value below DEGENERATE_SV_TOL); the
    SVD-derived rotation is still returned.
    """
    rotation, sigma = procrustes_rotation(np.asarray(target, dtype=float), basis.matrix)
    if sigma[-1] < DEGENERATE_SV_TOL:
        warnings.warn(
            f"Procrustes projection is nearly non-unique "
            f"(smallest singular value {sigma[-1]:.3e})",
            DegenerateProjectionWarning,
            stacklevel=2,
        )
    return RotatedBasis(basis.matrix @ rotation, rotation), float(sigma.sum())


def _nuclear_norm(a, b) -> float:
    sigma = np.linalg.svd(np.asarray(a).T @ np.asarray(b), compute_uv=False)
    return float(sigma.sum())


def subspace_distance(a, b) -> float:
    """Rotation-minimal distance between the ranges of two orthonormal bases.

    Computed as sqrt(2k - 2 ||a' b||_*) with the nuclear norm clamped to
    [0, k] before the square root; equals min over orthogonal R of
    ||a R - b||_F.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    k = a.shape[1]
    nn = min(max(_nuclear_norm(a, b), 0.0), float(k))
    return float(np.sqrt(2.0 * k - 2.0 * nn))


def projection_distance(a, b) -> float:
    """Frobenius distance between the orthogonal projectors a a' and b b'.

    Evaluated as sqrt(2k - 2 ||a' b||_F^2) so the n x n projectors are never
    formed.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    k = a.shape[1]
    cross = min(max(float(np.sum((a.T @ b) ** 2)), 0.0), float(k))
    return float(np.sqrt(2.0 * k - 2.0 * cross))
