"""Discriminative subnetwork mining for global-state network databases.

A database holds many network instances over a shared node set; each
instance carries per-node values and one discrete global state.  The
library learns a low-dimensional spectral transformation that separates
the global states while staying smooth over frequently shared edges, then
ranks nodes by their transformation coefficients and reports the connected
subnetworks they induce.
"""

from .data import (
    GeneralizedNetwork,
    NetworkDatabase,
    NetworkInstance,
    NodeIndex,
    StateMatrix,
    assemble_state_matrix,
    build_generalized_network,
    load_database,
    restrict_instances,
    write_database,
)
from .errors import SubnetmineError
from .evaluation import (
    EvalConfig,
    EvalReport,
    LinearClassifier,
    evaluate_dataset,
    fit_model,
    ranking_auc,
    run_cv,
    stratified_folds,
    sweep_alpha,
    train_linear_classifier,
)
from .metagraph import (
    AffinityPair,
    ConstraintMatrix,
    LaplacianSet,
    MetaGraphConfig,
    build_affinities,
    build_constraint_matrix,
    build_laplacian_set,
    cosine_similarity,
    knn_neighborhoods,
    laplacian,
)
from .selection import (
    Component,
    SelectionConfig,
    SubnetworkReport,
    build_report,
    extract_subnetworks,
    score_nodes,
    select_top_nodes,
)
from .solver import (
    SolverConfig,
    SpectralModel,
    TruncatedBasis,
    assemble_objective_matrix,
    load_model,
    save_model,
    solve_spectral,
    transform,
    truncated_svd_basis,
)
from .synth import (
    GroundTruth,
    SynthConfig,
    generate_backbone,
    generate_dataset,
    read_ground_truth,
    sample_database,
    write_synthetic_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AffinityPair",
    "Component",
    "ConstraintMatrix",
    "EvalConfig",
    "EvalReport",
    "GeneralizedNetwork",
    "GroundTruth",
    "LaplacianSet",
    "LinearClassifier",
    "MetaGraphConfig",
    "NetworkDatabase",
    "NetworkInstance",
    "NodeIndex",
    "SelectionConfig",
    "SolverConfig",
    "SpectralModel",
    "StateMatrix",
    "SubnetmineError",
    "SubnetworkReport",
    "SynthConfig",
    "TruncatedBasis",
    "assemble_objective_matrix",
    "assemble_state_matrix",
    "build_affinities",
    "build_constraint_matrix",
    "build_generalized_network",
    "build_laplacian_set",
    "build_report",
    "cosine_similarity",
    "evaluate_dataset",
    "extract_subnetworks",
    "fit_model",
    "generate_backbone",
    "generate_dataset",
    "knn_neighborhoods",
    "laplacian",
    "load_database",
    "load_model",
    "ranking_auc",
    "read_ground_truth",
    "restrict_instances",
    "run_cv",
    "sample_database",
    "save_model",
    "score_nodes",
    "select_top_nodes",
    "solve_spectral",
    "stratified_folds",
    "sweep_alpha",
    "train_linear_classifier",
    "transform",
    "truncated_svd_basis",
    "write_database",
    "write_synthetic_dataset",
]
