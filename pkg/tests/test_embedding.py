import numpy as np
import pytest

from kindicators.core import IsolatedVertexError, validate_embedding
from kindicators.embedding import SimilarityGraph, knn_graph, laplacian_eigenvalues, spectral_embed
from kindicators.evaluation import accuracy
from kindicators.kindap import kindap_solve


def _brute_force_knn(data, knn):
    n = len(data)
    w = np.zeros((n, n))
    for i in range(n):
        pairs = sorted(
            (np.linalg.norm(data[i] - data[j]), j) for j in range(n) if j != i
        )
        for _, j in pairs[:knn]:
            w[i, j] = 1.0
    return np.maximum(w, w.T)


def test_knn_graph_tie_rule_equidistant_triangle():
    # Standard basis vectors are mutually equidistant with squared distance
    # exactly 2, so every neighbor choice is a tie, resolved toward the
    # lowest index.
    data = np.eye(3)
    w = knn_graph(data, 1).weights
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 1.0  # 0 and 1 pick each other
    expected[2, 0] = expected[0, 2] = 1.0  # 2 picks 0
    np.testing.assert_array_equal(w, expected)


def test_knn_graph_two_far_pairs_is_block_diagonal():
    data = np.array([[0.0, 0.0], [0.1, 0.0], [100.0, 0.0], [100.1, 0.0]])
    w = knn_graph(data, 1).weights
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[1, 0] = 1.0
    expected[2, 3] = expected[3, 2] = 1.0
    np.testing.assert_array_equal(w, expected)


def test_knn_graph_matches_brute_force():
    rng = np.random.default_rng(0)
    data = rng.standard_normal((20, 3))
    for knn in (1, 3, 7):
        w = knn_graph(data, knn).weights
        np.testing.assert_array_equal(w, _brute_force_knn(data, knn))


def test_knn_graph_gaussian_weights_preserve_sparsity():
    rng = np.random.default_rng(1)
    data = rng.standard_normal((15, 2))
    binary = knn_graph(data, 3).weights
    gaussian = knn_graph(data, 3, weight="gaussian").weights
    np.testing.assert_array_equal(gaussian > 0, binary > 0)
    assert np.all(gaussian <= 1.0)
    np.testing.assert_allclose(gaussian, gaussian.T)


def test_knn_graph_validates_knn():
    data = np.zeros((4, 2))
    with pytest.raises(ValueError):
        knn_graph(data, 0)
    with pytest.raises(ValueError):
        knn_graph(data, 4)


def _component_graph(sizes, rng):
    """Block-diagonal graph of dense-ish components with the given sizes."""
    n = sum(sizes)
    w = np.zeros((n, n))
    start = 0
    for size in sizes:
        block = rng.uniform(0.5, 1.0, size=(size, size))
        block = np.triu(block, 1)
        block = block + block.T
        w[start : start + size, start : start + size] = block
        start += size
    return SimilarityGraph(w, knn=1)


def test_disconnected_components_give_zero_eigenvalues():
    rng = np.random.default_rng(2)
    graph = _component_graph([5, 4, 6], rng)
    eigenvalues = laplacian_eigenvalues(graph)
    assert np.all(eigenvalues[:3] <= 1e-10)
    assert eigenvalues[3] > 1e-6


def test_complete_graph_spectrum():
    n = 4
    w = np.ones((n, n)) - np.eye(n)
    graph = SimilarityGraph(w, knn=n - 1)
    eigenvalues = laplacian_eigenvalues(graph)
    assert eigenvalues[0] == pytest.approx(0.0, abs=1e-12)
    # All nonzero eigenvalues of the normalized Laplacian of K_n equal n/(n-1).
    np.testing.assert_allclose(eigenvalues[1:], n / (n - 1), atol=1e-12)
    embedded = spectral_embed(graph, 2)
    dense_vals, dense_vecs = np.linalg.eigh(
        np.eye(n) - w / (n - 1)
    )
    # The bottom eigenvector is unique up to sign; compare the spanned line.
    cos = abs(float(embedded.matrix[:, 0] @ dense_vecs[:, 0]))
    assert cos == pytest.approx(1.0, abs=1e-10)
    assert dense_vals[1] == pytest.approx(n / (n - 1), abs=1e-12)


def test_laplacian_eigenvalue_range():
    rng = np.random.default_rng(3)
    for _ in range(10):
        data = rng.standard_normal((20, 3))
        graph = knn_graph(data, 4)
        eigenvalues = laplacian_eigenvalues(graph)
        assert eigenvalues[0] >= -1e-10
        assert eigenvalues[-1] <= 2.0 + 1e-10


def test_spectral_embed_output_contract():
    rng = np.random.default_rng(4)
    data = rng.standard_normal((25, 4))
    graph = knn_graph(data, 5)
    for row_normalize in (False, True):
        embedded = spectral_embed(graph, 3, row_normalize=row_normalize)
        gram = embedded.matrix.T @ embedded.matrix
        assert np.max(np.abs(gram - np.eye(3))) <= 1e-8
        # Re-validation keeps it unchanged.
        again = validate_embedding(embedded.matrix)
        assert not again.orthonormalized


def test_spectral_embed_rejects_isolated_vertex():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.0
    w[2, 3] = w[3, 2] = 0.0
    graph = SimilarityGraph(w, knn=1)
    with pytest.raises(IsolatedVertexError) as err:
        spectral_embed(graph, 2)
    assert err.value.vertex == 2


def test_embedding_clusters_disconnected_components():
    rng = np.random.default_rng(5)
    sizes = [6, 8, 6]
    graph = _component_graph(sizes, rng)
    truth = np.repeat(np.arange(3), sizes)
    embedded = spectral_embed(graph, 3)
    result = kindap_solve(embedded)
    assert accuracy(result.labels, truth) == 1.0


def test_embedding_permutation_gives_same_partition():
    rng = np.random.default_rng(6)
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    data = np.vstack([c + rng.normal(0, 0.3, size=(8, 2)) for c in centers])
    truth = np.repeat(np.arange(3), 8)
    perm = rng.permutation(len(data))
    labels_base = kindap_solve(spectral_embed(knn_graph(data, 4), 3)).labels
    labels_perm = kindap_solve(spectral_embed(knn_graph(data[perm], 4), 3)).labels
    assert accuracy(labels_base, truth) == 1.0
    assert accuracy(labels_perm, truth[perm]) == 1.0
