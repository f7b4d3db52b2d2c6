"""Streaming subspace-based domain adaptation for drifting data streams.

The package aligns an unlabelled, drifting target stream to a fixed labelled
source domain: each mini-batch contributes a subspace, subspaces are averaged
online on the Grassmann manifold, and a closed-form flow kernel maps features
into a representation where the frozen source classifier keeps working.
"""

from .classifiers import KnnParams, LabeledSet, SvmParams, predict, train
from .errors import (
    ConfigError,
    DimensionMismatch,
    DimensionViolation,
    DomainError,
    DriftAlignError,
    InsufficientData,
    NoConvergence,
    NumericalHealthError,
    ParseError,
    RankDeficient,
    SchemaMismatch,
    SharedFactorFailure,
)
from .flow_kernel import TransformKernel, apply_transform, flow_kernel, quadrature_kernel
from .pipeline import (
    VARIANT_FLAGS,
    AccuracyTrace,
    BatchDiagnostics,
    MiniBatch,
    PipelineConfig,
    PipelineState,
    init_pipeline,
    process_batch,
    run_stream,
    variant_config,
)
from .streams import CsvSchema, DatasetBundle, StreamSpec, gen_rotating_drift, gen_waveform, load_csv
from .subspace_mean import (
    MeanSubspaceState,
    exp_tangent,
    init_mean,
    karcher_mean,
    log_tangent,
    update_mean,
)
from .subspaces import (
    GeodesicFlow,
    PrincipalSystem,
    Subspace,
    complement,
    evaluate,
    geodesic,
    geodesic_distance,
    orthonormalize,
    pca_subspace,
    principal_angles,
    principal_system,
    random_subspace,
)

__all__ = [
    "AccuracyTrace",
    "BatchDiagnostics",
    "ConfigError",
    "CsvSchema",
    "DatasetBundle",
    "DimensionMismatch",
    "DimensionViolation",
    "DomainError",
    "DriftAlignError",
    "GeodesicFlow",
    "InsufficientData",
    "KnnParams",
    "LabeledSet",
    "MeanSubspaceState",
    "MiniBatch",
    "NoConvergence",
    "NumericalHealthError",
    "ParseError",
    "PipelineConfig",
    "PipelineState",
    "PrincipalSystem",
    "RankDeficient",
    "SchemaMismatch",
    "SharedFactorFailure",
    "StreamSpec",
    "Subspace",
    "SvmParams",
    "TransformKernel",
    "VARIANT_FLAGS",
    "apply_transform",
    "complement",
    "evaluate",
    "exp_tangent",
    "flow_kernel",
    "gen_rotating_drift",
    "gen_waveform",
    "geodesic",
    "geodesic_distance",
    "init_mean",
    "init_pipeline",
    "karcher_mean",
    "load_csv",
    "log_tangent",
    "orthonormalize",
    "pca_subspace",
    "predict",
    "principal_angles",
    "principal_system",
    "process_batch",
    "quadrature_kernel",
    "random_subspace",
    "run_stream",
    "train",
    "update_mean",
    "variant_config",
]

__version__ = "0.1.0"
