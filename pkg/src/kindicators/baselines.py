"""Lloyd's k-means with k-means++ replications, and the spectral-rotation baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BinaryIndicator,
    ClusteringError,
    ClusterResult,
    EmbeddedData,
    InfeasibleKError,
    ORTHONORMAL_TOL,
    SolverTrace,
    make_indicator,
)
from .evaluation import kind_objective, kmeans_objective
from .kindap import OBJECTIVE_FLOOR, repair_empty_columns
from .projections import procrustes_rotation


@dataclass
class KmeansParams:
    replications: int = 10
    max_iters: int = 300
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class SrParams:
    replications: int = 10
    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        (x**2).sum(axis=1)[:, None]
        - 2.0 * x @ centers.T
        + (centers**2).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def kmeans_pp_init(data, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, the rest squared-distance weighted.

    When all remaining squared distances are zero (duplicate points), the next
    center falls back to a uniform choice among unchosen indices, so the k
    chosen indices are always distinct.
    """
    x = np.asarray(data, dtype=float)
    n = x.shape[0]
    if n < k:
        raise InfeasibleKError(f"{n} points cannot seed {k} centers")
    chosen = np.empty(k, dtype=int)
    chosen[0] = int(rng.integers(n))
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for t in range(1, k):
        total = d2.sum()
        if total <= 0:
            unchosen = np.setdiff1d(np.arange(n), chosen[:t])
            idx = int(rng.choice(unchosen))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen[t] = idx
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _seize_for_empty(x, labels, centers, dist_to_own):
    """Give each empty cluster the point farthest from its current center."""
    k = centers.shape[0]
    sizes = np.bincount(labels, minlength=k)
    for j in range(k):
        if sizes[j] > 0:
            continue
        candidates = np.where(sizes[labels] >= 2, dist_to_own, -np.inf)
        i = int(np.argmax(candidates))
        if candidates[i] == -np.inf:
            raise InfeasibleKError("cannot repair empty cluster: n < k")
        sizes[labels[i]] -= 1
        labels[i] = j
        sizes[j] += 1
        centers[j] = x[i]
        dist_to_own[i] = 0.0
    return labels, centers, dist_to_own


def _kind_objective_if_embedded(x: np.ndarray, labels: np.ndarray) -> float | None:
    """Kind objective of the labels when x is a column-orthonormal n x k matrix."""
    n, d = x.shape
    if n < d or np.max(np.abs(x.T @ x - np.eye(d))) > ORTHONORMAL_TOL:
        return None
    try:
        h = make_indicator(labels, d)
    except ClusteringError:
        return None
    sigma = np.linalg.svd(x.T @ h.matrix, compute_uv=False)
    return max(2.0 * d - 2.0 * float(sigma.sum()), 0.0)


def lloyd_solve(data, k: int, init_centers, params: KmeansParams | None = None) -> ClusterResult:
    """Standard assign/update k-means iteration from the given centers.

    Records the within-cluster sum of squares after every assignment step
    (nonincreasing across iterations); empty clusters are repaired by seizing
    the point farthest from its current center, deterministically. Stops when
    the Frobenius movement of the centers falls below `params.tol` relative to
    their norm, or at `params.max_iters`.
    """
    if params is None:
        params = KmeansParams()
    x = np.asarray(data, dtype=float)
    centers = np.array(init_centers, dtype=float)
    if centers.shape != (k, x.shape[1]):
        raise ValueError(f"init_centers must be {k} x {x.shape[1]}")
    n = x.shape[0]
    trace = SolverTrace()
    labels = np.zeros(n, dtype=int)
    for it in range(1, params.max_iters + 1):
        d2 = _squared_distances(x, centers)
        labels = np.argmin(d2, axis=1)
        dist_to_own = d2[np.arange(n), labels]
        if np.bincount(labels, minlength=k).min() == 0:
            labels, centers, dist_to_own = _seize_for_empty(
                x, labels, centers, dist_to_own
            )
        trace.objective_history.append(float(dist_to_own.sum()))
        trace.outer_iters = it
        new_centers = np.zeros_like(centers)
        np.add.at(new_centers, labels, x)
        new_centers /= np.bincount(labels, minlength=k)[:, None]
        shift = float(np.linalg.norm(new_centers - centers))
        scale = max(float(np.linalg.norm(centers)), OBJECTIVE_FLOOR)
        centers = new_centers
        if shift <= params.tol * scale:
            break
    final_obj = float(((x - centers[labels]) ** 2).sum())
    return ClusterResult(
        labels=labels,
        kind_objective=_kind_objective_if_embedded(x, labels),
        kmeans_objective=final_obj,
        trace=trace,
    )


def kmeans_solve(data, k: int, params: KmeansParams | None = None) -> ClusterResult:
    """Best of `params.replications` k-means++ starts of :func:`lloyd_solve`.

    Each replication draws from its own seed-derived stream (indexed spawning
    of the base seed), so results do not depend on execution order. The
    replication with the lowest objective wins; ties go to the lowest index.
    """
    if params is None:
        params = KmeansParams()
    x = np.asarray(data, dtype=float)
    if x.shape[0] < k:
        raise InfeasibleKError(f"{x.shape[0]} points cannot form {k} clusters")
    streams = np.random.SeedSequence(params.seed).spawn(params.replications)
    results = []
    for stream in streams:
        rng = np.random.default_rng(stream)
        centers = kmeans_pp_init(x, k, rng)
        results.append(lloyd_solve(x, k, centers, params))
    objectives = [r.kmeans_objective for r in results]
    best = int(np.argmin(objectives))
    winner = results[best]
    winner.trace.replication_index = best
    winner.trace.replication_objectives = objectives
    winner.trace.replication_histories = [r.trace.objective_history for r in results]
    return winner


def _random_orthogonal(k: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal factor of a standard Gaussian k x k matrix, sign-fixed."""
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _sr_once(basis: EmbeddedData, rotation: np.ndarray, params: SrParams):
    """One spectral-rotation run from a given initial rotation.

    Alternates the one-hot assignment update (argmax per row of U R, ties to
    the lowest column, empty columns repaired) with the closed-form rotation
    update. Both half-steps minimize the objective exactly on the
    unconstrained set, but the repair can push uphill, so an iterate that
    increases the objective is rejected and the run stops with the previous
    one; the recorded history is therefore nonincreasing.
    """
    u_hat = basis.matrix
    n, k = u_hat.shape
    history: list[float] = []
    prev = None
    out_labels = np.zeros(n, dtype=int)
    out_obj = np.inf
    for _ in range(1, params.max_iters + 1):
        scores = u_hat @ rotation
        labels = repair_empty_columns(scores, np.argmax(scores, axis=1))
        b = BinaryIndicator.from_labels(labels, k)
        rotation, _ = procrustes_rotation(b.matrix, u_hat)
        obj = float(((u_hat @ rotation - b.matrix) ** 2).sum())
        if prev is not None and obj > prev:
            break
        history.append(obj)
        out_labels, out_obj = labels, obj
        if obj <= OBJECTIVE_FLOOR:
            break
        if prev is not None and prev - obj <= params.tol * max(prev, OBJECTIVE_FLOOR):
            break
        prev = obj
    return out_labels, out_obj, history


def sr_solve(basis: EmbeddedData, params: SrParams | None = None) -> ClusterResult:
    """Spectral rotation: fit a binary indicator to a rotation of the basis.

    Runs `params.replications` restarts from random orthogonal rotations
    (seed-derived independent streams) and keeps the one with the lowest
    rotation-fit objective. The returned result reports the winning labels'
    kind and k-means objectives for cross-model comparison; the rotation-fit
    objective itself lives in the trace.
    """
    if params is None:
        params = SrParams()
    n, k = basis.matrix.shape
    if n < k:
        raise InfeasibleKError(f"{n} objects cannot form {k} clusters")
    streams = np.random.SeedSequence(params.seed).spawn(params.replications)
    runs = []
    for stream in streams:
        rng = np.random.default_rng(stream)
        runs.append(_sr_once(basis, _random_orthogonal(k, rng), params))
    objectives = [obj for _, obj, _ in runs]
    best = int(np.argmin(objectives))
    labels, _, history = runs[best]
    trace = SolverTrace(
        outer_iters=len(history),
        objective_history=history,
        replication_index=best,
        replication_objectives=objectives,
        replication_histories=[h for _, _, h in runs],
    )
    return ClusterResult(
        labels=labels,
        kind_objective=kind_objective(basis, make_indicator(labels, k)),
        kmeans_objective=kmeans_objective(basis, labels),
        trace=trace,
    )
