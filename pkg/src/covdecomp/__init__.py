"""Sparse decomposition of covariance matrices into a Markov precision
component and a sparse residual covariance, with an ADMM solver,
recovery metrics, Gaussian belief propagation, and an experiment
harness.
"""

__version__ = "0.1.0"

from .errors import (
    CovdecompError,
    DimensionMismatch,
    EmptyTruthSupport,
    InfeasibleConstraints,
    MalformedCsv,
    MessagePrecisionNonpositive,
    NonNumericCell,
    NonPositiveDiagonal,
    NotPositiveDefinite,
    PreconditionViolated,
    SingularSubmatrix,
)
from .inference import InfoModel, LbpTrace, exact_moments, lbp_run, walk_summability
from .metrics import (
    DEFAULT_SUPPORT_THRESHOLD,
    MetricsRecord,
    compare_to_truth,
    edit_distance,
    normalized_edit_distance,
    overall_precision_error,
    sign_consistency,
    support_of,
)
from .model import (
    DecompositionModel,
    DiagBoostPolicy,
    IncoherenceReport,
    chain_model,
    grid_model,
    incoherence_report,
    partition_pairs,
    true_covariance,
    validate_model,
)
from .sampling import (
    SampleSet,
    derive_seed,
    draw_samples,
    gamma_schedule,
    sample_covariance,
    sample_covariance_centered,
)
from .serialize import (
    SCHEMA_VERSION,
    load_model,
    load_result,
    load_samples,
    save_model,
    save_result,
    save_samples,
    write_trace_csv,
)
from .solver import (
    SolveResult,
    SolverConfig,
    admm_solve,
    clear_solve_log,
    diagonal_residual,
    duality_gap,
    extract_residual,
    post_check_overall_pd,
    soft_threshold_covariance,
    solve_log,
    witness_solve,
)
from .symmat import (
    PairIndexSet,
    SymmetricMatrix,
    eig_sym,
    hessian_submatrix,
    inf_operator_norm,
    logdet_pd,
)

__all__ = [
    "CovdecompError",
    "DEFAULT_SUPPORT_THRESHOLD",
    "DecompositionModel",
    "DiagBoostPolicy",
    "DimensionMismatch",
    "EmptyTruthSupport",
    "IncoherenceReport",
    "InfeasibleConstraints",
    "InfoModel",
    "LbpTrace",
    "MalformedCsv",
    "MessagePrecisionNonpositive",
    "MetricsRecord",
    "NonNumericCell",
    "NonPositiveDiagonal",
    "NotPositiveDefinite",
    "PairIndexSet",
    "PreconditionViolated",
    "SCHEMA_VERSION",
    "SampleSet",
    "SingularSubmatrix",
    "SolveResult",
    "SolverConfig",
    "SymmetricMatrix",
    "admm_solve",
    "chain_model",
    "clear_solve_log",
    "compare_to_truth",
    "derive_seed",
    "diagonal_residual",
    "draw_samples",
    "duality_gap",
    "edit_distance",
    "eig_sym",
    "exact_moments",
    "extract_residual",
    "gamma_schedule",
    "grid_model",
    "hessian_submatrix",
    "incoherence_report",
    "inf_operator_norm",
    "lbp_run",
    "load_model",
    "load_result",
    "load_samples",
    "logdet_pd",
    "normalized_edit_distance",
    "overall_precision_error",
    "partition_pairs",
    "post_check_overall_pd",
    "sample_covariance",
    "sample_covariance_centered",
    "save_model",
    "save_result",
    "save_samples",
    "sign_consistency",
    "soft_threshold_covariance",
    "solve_log",
    "support_of",
    "true_covariance",
    "validate_model",
    "walk_summability",
    "witness_solve",
    "write_trace_csv",
]
