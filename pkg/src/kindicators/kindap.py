"""Double-layer alternating-projection solver for the K-indicators model.

The inner loop alternates exact projections between the rotations of the data
basis and the [0, 1] box (the semi-convex relaxation of the indicator set);
the outer loop rounds the relaxed assignment to an indicator matrix, scores
it, and projects it back onto the rotation set to restart. Both projections
are exact, so the inner gap is nonincreasing by construction, and the whole
solve is deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AllZeroRowError,
    ClusterResult,
    EmbeddedData,
    IndicatorMatrix,
    InfeasibleKError,
    RelaxedAssignment,
    SolverTrace,
    make_indicator,
)
from .evaluation import kind_objective, kmeans_objective
from .projections import DEGENERATE_SV_TOL, RotatedBasis, procrustes_rotation

# Objectives at or below this are treated as zero (the model's global floor).
OBJECTIVE_FLOOR = 1e-12

ROUNDING_MODES = ("magnitude", "binary")


@dataclass
class KindapParams:
    """Solver knobs.

    Tolerances are relative objective improvements; iteration caps are
    generous compared to the handful of outer and dozens of inner iterations
    typically needed. `seed` is reserved for degenerate repairs; the solver
    itself is deterministic and never draws from it. `rounding` picks the
    value written into the kept entry when rounding the relaxed assignment:
    "magnitude" keeps the relaxed value (columns renormalized), "binary" uses
    the equal-weight 1/sqrt(n_j) convention.
    """

    max_outer: int = 50
    max_inner: int = 200
    tol_inner: float = 1e-5
    tol_outer: float = 1e-5
    seed: int = 0
    rounding: str = "magnitude"

    def __post_init__(self):
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.tol_inner <= 0 or self.tol_outer <= 0:
            raise ValueError("tolerances must be positive")
        if self.rounding not in ROUNDING_MODES:
            raise ValueError(f"rounding must be one of {ROUNDING_MODES}")


def inner_solve(
    start: RotatedBasis,
    basis: EmbeddedData,
    params: KindapParams,
    trace: SolverTrace | None = None,
) -> tuple[RelaxedAssignment, RotatedBasis, int]:
    """Alternate box and Procrustes projections from `start` until the gap stalls.

    Each iteration clamps the current rotated basis into the box, then projects
    the result back onto the rotation set; the squared gap ||U - N||_F^2 is
    recorded per iteration and is nonincreasing because both projections are
    exact. Stops once the relative gap improvement drops below
    `params.tol_inner` or `params.max_inner` is reached.

    Returns the final relaxed assignment, rotated basis, and iteration count.
    When `trace` is given, the gap sequence is appended to its
    objective_history and near-degenerate projections are noted in its
    warnings.
    """
    u = start.matrix
    rotation = start.rotation
    prev = None
    history: list[float] = []
    iters = 0
    for t in range(1, params.max_inner + 1):
        n_mat = np.clip(u, 0.0, 1.0)
        rotation, sigma = procrustes_rotation(n_mat, basis.matrix)
        u = basis.matrix @ rotation
        gap = float(((u - n_mat) ** 2).sum())
        history.append(gap)
        iters = t
        if trace is not None and sigma[-1] < DEGENERATE_SV_TOL:
            trace.warnings.append(f"degenerate projection at inner iteration {t}")
        if prev is not None and prev - gap <= params.tol_inner * max(prev, OBJECTIVE_FLOOR):
            break
        prev = gap
    if trace is not None:
        trace.objective_history.extend(history)
    return RelaxedAssignment(n_mat), RotatedBasis(u, rotation), iters


def repair_empty_columns(values: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Reassign rows so every column of an argmax labeling is nonempty.

    For each empty column j in ascending order, the row with the largest
    `values[:, j]` among rows whose current cluster has at least two members
    moves to j (ties broken by the lowest row index). Deterministic; raises
    AllZeroRowError when no eligible row exists, which can only happen for
    n < k.
    """
    n, k = values.shape
    labels = np.array(labels, dtype=int)
    sizes = np.bincount(labels, minlength=k)
    for j in range(k):
        if sizes[j] > 0:
            continue
        candidates = np.where(sizes[labels] >= 2, values[:, j], -np.inf)
        i = int(np.argmax(candidates))
        if candidates[i] == -np.inf:
            raise AllZeroRowError(
                f"cannot populate cluster {j}: no row is movable (n < k?)"
            )
        sizes[labels[i]] -= 1
        labels[i] = j
        sizes[j] += 1
    return labels


def round_to_indicator(
    relaxed: RelaxedAssignment,
    rng=None,
    mode: str = "magnitude",
) -> IndicatorMatrix:
    """Round a relaxed assignment to the nearest indicator-structured matrix.

    Keeps each row's largest entry (ties go to the lowest column index), zeroes
    the rest, repairs empty columns with :func:`repair_empty_columns`, and
    normalizes every column to unit norm. "magnitude" mode preserves the kept
    values' relative sizes; "binary" mode writes the equal-weight value
    1/sqrt(n_j) instead. `rng` is accepted for interface stability; the repair
    rule is deterministic and never draws from it.
    """
    del rng
    if mode not in ROUNDING_MODES:
        raise ValueError(f"mode must be one of {ROUNDING_MODES}")
    n_mat = relaxed.matrix
    n, k = n_mat.shape
    labels = repair_empty_columns(n_mat, np.argmax(n_mat, axis=1))
    if mode == "binary":
        sizes = np.bincount(labels, minlength=k)
        kept = 1.0 / np.sqrt(sizes[labels].astype(float))
    else:
        kept = n_mat[np.arange(n), labels].copy()
        # Rows parked by repair can carry a zero; give them unit weight so the
        # result still has one positive entry per row.
        kept[kept <= 0] = 1.0
        norms = np.sqrt(np.bincount(labels, weights=kept**2, minlength=k))
        kept = kept / norms[labels]
    h = np.zeros((n, k))
    h[np.arange(n), labels] = kept
    return IndicatorMatrix(h, labels)


def kindap_solve(basis: EmbeddedData, params: KindapParams | None = None) -> ClusterResult:
    """Cluster a column-orthonormal embedding by double-layer alternating projections.

    Starting from the identity rotation, each outer iteration runs
    :func:`inner_solve`, rounds the relaxed assignment to an indicator matrix,
    evaluates the squared subspace distance between the data range and the
    (normalized) indicator range, and projects the rounded matrix back onto
    the rotation set to restart. The outer loop stops at the objective floor,
    when the relative improvement drops below `params.tol_outer`, or at
    `params.max_outer`; the best-scoring labeling ever seen is returned, along
    with its indicator-form k-means objective, the final relaxed assignment,
    and the full trace.
    """
    if params is None:
        params = KindapParams()
    n, k = basis.matrix.shape
    if n < k:
        raise InfeasibleKError(f"{n} objects cannot form {k} clusters")
    trace = SolverTrace()
    current = RotatedBasis(basis.matrix, np.eye(k))
    best_f = np.inf
    best_labels: np.ndarray | None = None
    last_relaxed: RelaxedAssignment | None = None
    f_prev = None
    for outer in range(1, params.max_outer + 1):
        relaxed, current, inner_iters = inner_solve(current, basis, params, trace=trace)
        last_relaxed = relaxed
        trace.inner_iters_per_outer.append(inner_iters)
        trace.outer_iters = outer
        rounded = round_to_indicator(relaxed, mode=params.rounding)
        f = kind_objective(basis, make_indicator(rounded.labels, k))
        trace.outer_objective_history.append(f)
        if f < best_f:
            best_f = f
            best_labels = rounded.labels
        if f <= OBJECTIVE_FLOOR:
            break
        if f_prev is not None and f_prev - f <= params.tol_outer * max(f_prev, OBJECTIVE_FLOOR):
            break
        f_prev = f
        # Restart the next outer phase from the projection of the rounded
        # indicator back onto the rotation set.
        rotation, sigma = procrustes_rotation(rounded.matrix, basis.matrix)
        if sigma[-1] < DEGENERATE_SV_TOL:
            trace.warnings.append(f"degenerate restart projection at outer iteration {outer}")
        current = RotatedBasis(basis.matrix @ rotation, rotation)
    assert best_labels is not None
    return ClusterResult(
        labels=best_labels,
        kind_objective=best_f,
        kmeans_objective=kmeans_objective(basis, best_labels),
        relaxed=last_relaxed,
        trace=trace,
    )


def warm_start_centers(basis: EmbeddedData, result: ClusterResult) -> np.ndarray:
    """Per-cluster means of the embedded rows, for warm-starting Lloyd iterations."""
    labels = np.asarray(result.labels, dtype=int)
    if labels.shape != (basis.n,):
        raise ValueError("labels length must match the embedding")
    make_indicator(labels, basis.k)  # validation only: every cluster nonempty
    sizes = np.bincount(labels, minlength=basis.k).astype(float)
    centers = np.zeros((basis.k, basis.k))
    np.add.at(centers, labels, basis.matrix)
    return centers / sizes[:, None]
