"""Unified optimization view of GNN propagation operators.

Eight propagation mechanisms (sgc, gc, ppnp, appnp, jknet, dagnn, gnn-lf,
gnn-hf) realized as minimizers of one fitting-plus-smoothing objective, in
closed and iterative form, with spectral-filter analysis, a training
harness, synthetic data, and a CLI.
"""

from .errors import (
    BundleError,
    ConfigError,
    DatasetError,
    GnnUnifyError,
    InvalidEdge,
    NotPositiveDefinite,
    ShapeError,
    SolverError,
    TrainingDiverged,
)
from .graphs import Graph, NormalizedOperators, build_graph, normalize, spmm
from .linalg import SolveReport, cg_solve, child_seeds, cholesky_solve, seeded_rng
from .propagation import (
    ConvergenceReport,
    Mode,
    Model,
    PropagationConfig,
    contraction_ratio,
    jknet_series_weights,
    objective_gradient,
    objective_value,
    propagate,
    verify_convergence,
)
from .spectral import (
    Basis,
    FilterCoefficients,
    MAX_EXPANSION_DEPTH,
    closed_coefficients,
    coefficient_discrepancies,
    expand_iterate,
    geometric_truncation,
    polynomial_response,
    rational_response,
    to_laplacian_basis,
)
from .data import (
    Dataset,
    SBM_PRESETS,
    SbmConfig,
    generate_sbm,
    homophily_ratio,
    load_bundle,
    write_bundle,
)
from .nn import (
    Metrics,
    MlpParams,
    TrainConfig,
    accuracy,
    dropout_mask,
    forward,
    init_params,
    loss_and_grad,
    train,
)
from .estimators import GnnNodeClassifier, GraphPropagator

__version__ = "0.1.0"

__all__ = [
    "GnnUnifyError", "InvalidEdge", "ShapeError", "ConfigError", "SolverError",
    "NotPositiveDefinite", "DatasetError", "BundleError", "TrainingDiverged",
    "Graph", "NormalizedOperators", "build_graph", "normalize", "spmm",
    "SolveReport", "cg_solve", "cholesky_solve", "seeded_rng", "child_seeds",
    "Model", "Mode", "PropagationConfig", "ConvergenceReport", "propagate",
    "objective_value", "objective_gradient", "verify_convergence",
    "jknet_series_weights", "contraction_ratio",
    "Basis", "FilterCoefficients", "MAX_EXPANSION_DEPTH", "expand_iterate",
    "geometric_truncation", "to_laplacian_basis", "closed_coefficients",
    "coefficient_discrepancies", "polynomial_response", "rational_response",
    "Dataset", "SbmConfig", "SBM_PRESETS", "load_bundle", "write_bundle",
    "generate_sbm", "homophily_ratio",
    "MlpParams", "TrainConfig", "Metrics", "init_params", "dropout_mask",
    "forward", "loss_and_grad", "train", "accuracy",
    "GraphPropagator", "GnnNodeClassifier",
    "__version__",
]
