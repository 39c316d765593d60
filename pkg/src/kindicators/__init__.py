"""Subspace-matching clustering toolkit.

Clusters column-orthonormal embeddings by matching the data range to the
range of an indicator matrix via double-layer alternating projections, with
k-means and spectral-rotation baselines, a spectral-embedding front end, a
deterministic synthetic benchmark generator, and evaluation utilities.
"""

from .baselines import KmeansParams, SrParams, kmeans_pp_init, kmeans_solve, lloyd_solve, sr_solve
from .core import (
    BinaryIndicator,
    ClusteringError,
    ClusterResult,
    EmbeddedData,
    IndicatorMatrix,
    RelaxedAssignment,
    SolverTrace,
    make_indicator,
    validate_embedding,
)
from .embedding import SimilarityGraph, knn_graph, spectral_embed
from .evaluation import SoftIndicator, accuracy, kind_objective, kmeans_objective, soft_indicator
from .kindap import KindapParams, inner_solve, kindap_solve, round_to_indicator, warm_start_centers
from .projections import (
    RotatedBasis,
    procrustes_project,
    project_box,
    projection_distance,
    subspace_distance,
)
from .synthgen import SynthDataset, SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "BinaryIndicator",
    "ClusteringError",
    "ClusterResult",
    "EmbeddedData",
    "IndicatorMatrix",
    "KindapParams",
    "KmeansParams",
    "RelaxedAssignment",
    "RotatedBasis",
    "SimilarityGraph",
    "SoftIndicator",
    "SolverTrace",
    "SrParams",
    "SynthDataset",
    "SynthSpec",
    "accuracy",
    "generate",
    "inner_solve",
    "kind_objective",
    "kindap_solve",
    "kmeans_objective",
    "kmeans_pp_init",
    "kmeans_solve",
    "knn_graph",
    "lloyd_solve",
    "make_indicator",
    "procrustes_project",
    "project_box",
    "projection_distance",
    "round_to_indicator",
    "soft_indicator",
    "spectral_embed",
    "sr_solve",
    "subspace_distance",
    "validate_embedding",
    "warm_start_centers",
]
