from itertools import permutations

import numpy as np
import pytest

from kindicators.core import (
    EmptyClusterError,
    LengthMismatchError,
    RelaxedAssignment,
    ZeroRowError,
    make_indicator,
    validate_embedding,
)
from kindicators.evaluation import accuracy, kind_objective, kmeans_objective, soft_indicator
from kindicators.projections import subspace_distance

from oracles import random_orthonormal


def _accuracy_by_permutation(pred, truth):
    """Exhaustive oracle: best relabeling tried one permutation at a time."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    k_pred = pred.max() + 1
    k_truth = truth.max() + 1
    size = max(k_pred, k_truth)
    best = 0
    for perm in permutations(range(size)):
        mapped = np.asarray([perm[p] for p in pred])
        best = max(best, int((mapped == truth).sum()))
    return best / pred.size


def test_accuracy_identity_and_relabeling():
    truth = np.array([0, 1, 2, 1, 0, 2])
    assert accuracy(truth, truth) == 1.0
    relabeled = np.array([2, 0, 1, 0, 2, 1])
    assert accuracy(relabeled, truth) == 1.0


def test_accuracy_worked_example():
    assert accuracy([0, 0, 1, 1], [0, 1, 1, 1]) == 0.75
    assert _accuracy_by_permutation([0, 0, 1, 1], [0, 1, 1, 1]) == 0.75


def test_accuracy_matches_permutation_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(4, 15))
        k_pred = int(rng.integers(2, 5))
        k_truth = int(rng.integers(2, 5))
        pred = rng.integers(0, k_pred, size=n)
        truth = rng.integers(0, k_truth, size=n)
        assert accuracy(pred, truth) == pytest.approx(
            _accuracy_by_permutation(pred, truth), abs=1e-12
        )


def test_accuracy_symmetric_under_relabeling_both_sides():
    rng = np.random.default_rng(1)
    truth = rng.integers(0, 3, size=20)
    pred = rng.integers(0, 3, size=20)
    base = accuracy(pred, truth)
    relabel = np.array([2, 0, 1])
    assert accuracy(relabel[pred], truth) == pytest.approx(base, abs=1e-12)
    assert accuracy(pred, relabel[truth]) == pytest.approx(base, abs=1e-12)


def test_accuracy_length_mismatch():
    with pytest.raises(LengthMismatchError):
        accuracy([0, 1], [0, 1, 1])


def test_soft_indicator_examples():
    s = soft_indicator(RelaxedAssignment(np.array([[1.0, 0.0, 0.0]]))).s
    assert s[0] == 1.0
    s = soft_indicator(RelaxedAssignment(np.array([[0.5, 0.5, 0.1]]))).s
    assert s[0] == 0.0
    s = soft_indicator(RelaxedAssignment(np.array([[0.8, 0.2]]))).s
    assert s[0] == pytest.approx(0.75)


def test_soft_indicator_zero_row():
    with pytest.raises(ZeroRowError) as err:
        soft_indicator(RelaxedAssignment(np.array([[0.5, 0.2], [0.0, 0.0]])))
    assert err.value.row == 1


def test_soft_indicator_range():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n_mat = rng.uniform(0.01, 1.0, size=(rng.integers(2, 20), rng.integers(2, 6)))
        s = soft_indicator(RelaxedAssignment(n_mat)).s
        assert np.all(s >= 0.0)
        assert np.all(s <= 1.0)


def test_kind_objective_zero_when_ranges_match():
    h = make_indicator([0, 0, 1, 1, 2], 3)
    basis = validate_embedding(h.matrix)
    assert kind_objective(basis, h) == pytest.approx(0.0, abs=1e-12)


def test_kind_objective_orthogonal_ranges():
    # Basis columns sum to zero on every cluster, so U'H vanishes exactly and
    # the objective sits at its ceiling 2k.
    basis = validate_embedding(
        np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]) / np.sqrt(2)
    )
    h = make_indicator([0, 0, 1, 1], 2)
    assert float(np.max(np.abs(basis.matrix.T @ h.matrix))) < 1e-15
    assert kind_objective(basis, h) == pytest.approx(4.0, abs=1e-12)


def test_kind_objective_matches_subspace_distance():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(5, 25))
        k = int(rng.integers(2, 5))
        basis = validate_embedding(random_orthonormal(n, k, rng))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
        h = make_indicator(labels, k)
        assert kind_objective(basis, h) == pytest.approx(
            subspace_distance(basis.matrix, h.matrix) ** 2, abs=1e-9
        )


def test_kind_objective_rotation_invariant():
    rng = np.random.default_rng(4)
    basis = validate_embedding(random_orthonormal(12, 3, rng))
    labels = np.array([0, 1, 2] * 4)
    h = make_indicator(labels, 3)
    rotation = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    rotated = validate_embedding(basis.matrix @ rotation)
    assert kind_objective(rotated, h) == pytest.approx(kind_objective(basis, h), abs=1e-9)
    assert kmeans_objective(rotated, labels) == pytest.approx(
        kmeans_objective(basis, labels), abs=1e-9
    )


def test_kmeans_objective_zero_on_indicator_basis():
    h = make_indicator([0, 0, 1, 1, 2], 3)
    basis = validate_embedding(h.matrix)
    assert kmeans_objective(basis, [0, 0, 1, 1, 2]) == pytest.approx(0.0, abs=1e-12)


def test_kmeans_objective_matches_centroid_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(6, 25))
        k = int(rng.integers(2, 5))
        basis = validate_embedding(random_orthonormal(n, k, rng))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
        total = 0.0
        for j in range(k):
            members = basis.matrix[labels == j]
            total += float(((members - members.mean(axis=0)) ** 2).sum())
        assert kmeans_objective(basis, labels) == pytest.approx(total, abs=1e-8)


def test_kmeans_objective_rejects_empty_cluster():
    basis = validate_embedding(np.eye(4)[:, :3])
    with pytest.raises(EmptyClusterError):
        kmeans_objective(basis, [0, 0, 1, 1])
