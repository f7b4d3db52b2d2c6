"""Online adaptation pipeline over a stream of unlabelled mini-batches.

Per batch: (optional) feedback multiply by the previous kernel, PCA of the
batch, (optional) running-mean update, (optional) flow-kernel transform, then
prediction with the frozen source classifier. State is a constant-size record
(source subspace, classifier, running mean, last kernel), so memory does not
grow with the stream, and every step sees only current and past batches.

The ablation ladder is spanned by three switches: use_gfk (transform on/off),
use_gmean (running mean vs per-batch subspace as transform target), and
use_feedback (previous kernel applied to the raw batch before PCA).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers import (
    KnnModel,
    KnnParams,
    LabeledSet,
    LinearSvmModel,
    SvmParams,
    predict,
    train,
)
from .errors import ConfigError, DimensionMismatch, RankDeficient
from .flow_kernel import TransformKernel, apply_transform, flow_kernel
from .subspace_mean import MeanSubspaceState, init_mean, update_mean
from .subspaces import Array, Subspace, complement, pca_subspace, principal_angles

# Variant name -> (use_gfk, use_gmean, use_feedback), in ladder order.
VARIANT_FLAGS: dict[str, tuple[bool, bool, bool]] = {
    "pca": (False, False, False),
    "gfk": (True, False, False),
    "gfk_fb": (True, False, True),
    "gfk_gmean": (True, True, False),
    "gfk_gmean_fb": (True, True, True),
}

# Batches whose largest source-target angle exceeds this are flagged in
# diagnostics: the pair is near-orthogonal and the transform says little.
NEAR_ORTHOGONAL_ANGLE = np.pi / 2 - 0.01

STEP_NAMES = ("pca", "mean", "gfk", "predict")


@dataclass(frozen=True)
class PipelineConfig:
    """Switches and parameters for one pipeline run."""

    sub_dim: int
    use_gfk: bool = False
    use_gmean: bool = False
    use_feedback: bool = False
    classifier: str = "knn"
    knn_params: KnnParams = KnnParams()
    svm_params: SvmParams = SvmParams()
    diagnostics: bool = False

    def __post_init__(self) -> None:
        if int(self.sub_dim) < 1:
            raise ConfigError(f"sub_dim must be >= 1, got {self.sub_dim}")
        if self.classifier not in ("knn", "svm"):
            raise ConfigError(f"classifier must be 'knn' or 'svm', got {self.classifier!r}")
        if self.use_feedback and not self.use_gfk:
            raise ConfigError("use_feedback requires use_gfk: there is no kernel to feed back")


def variant_config(
    name: str,
    sub_dim: int,
    classifier: str = "knn",
    knn_params: KnnParams = KnnParams(),
    svm_params: SvmParams = SvmParams(),
    diagnostics: bool = False,
) -> PipelineConfig:
    """Config for a named ablation variant."""
    if name not in VARIANT_FLAGS:
        raise ConfigError(f"unknown variant {name!r}; expected one of {list(VARIANT_FLAGS)}")
    use_gfk, use_gmean, use_feedback = VARIANT_FLAGS[name]
    return PipelineConfig(
        sub_dim=sub_dim,
        use_gfk=use_gfk,
        use_gmean=use_gmean,
        use_feedback=use_feedback,
        classifier=classifier,
        knn_params=knn_params,
        svm_params=svm_params,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True, eq=False)
class MiniBatch:
    """One unlabelled batch of stream rows; labels ride along for scoring only."""

    x: Array
    true_labels: Array | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise DimensionMismatch(f"batch needs at least 2 rows, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("batch has non-finite entries")
        out = np.array(x)
        out.setflags(write=False)
        object.__setattr__(self, "x", out)
        if self.true_labels is not None:
            y = np.asarray(self.true_labels).astype(np.int64)
            if y.shape != (x.shape[0],):
                raise DimensionMismatch(f"labels must have shape ({x.shape[0]},), got {y.shape}")
            y.setflags(write=False)
            object.__setattr__(self, "true_labels", y)

    @property
    def n_rows(self) -> int:
        return int(self.x.shape[0])


@dataclass(frozen=True, eq=False)
class PipelineState:
    """Everything carried between batches; size is independent of the stream."""

    config: PipelineConfig
    source_subspace: Subspace
    source_complement: Subspace
    model: KnnModel | LinearSvmModel
    mean_state: MeanSubspaceState | None
    last_kernel: TransformKernel | None
    batch_count: int


@dataclass
class BatchDiagnostics:
    """Per-batch bookkeeping: step timings and optional angle telemetry."""

    step_seconds: dict[str, float]
    error: str | None = None
    target_angles: Array | None = None
    near_orthogonal: bool = False


def init_pipeline(source: LabeledSet, config: PipelineConfig) -> PipelineState:
    """Fit the source subspace and classifier; no stream data is touched."""
    source_subspace = pca_subspace(source.x, config.sub_dim)
    source_comp = complement(source_subspace)
    params = config.knn_params if config.classifier == "knn" else config.svm_params
    model = train(source, config.classifier, params)
    return PipelineState(
        config=config,
        source_subspace=source_subspace,
        source_complement=source_comp,
        model=model,
        mean_state=None,
        last_kernel=None,
        batch_count=0,
    )


def process_batch(
    state: PipelineState,
    batch: MiniBatch,
) -> tuple[Array | None, PipelineState, BatchDiagnostics]:
    """Run one batch through the configured steps.

    Returns (predictions, new_state, diagnostics). A rank-deficient batch
    yields (None, unchanged state, diagnostics with the error recorded); any
    other failure propagates.
    """
    cfg = state.config
    timings = dict.fromkeys(STEP_NAMES, 0.0)

    t0 = time.perf_counter()
    if cfg.use_feedback and state.last_kernel is not None:
        x_pre = apply_transform(batch.x, state.last_kernel)
    else:
        x_pre = batch.x
    try:
        batch_subspace = pca_subspace(x_pre, cfg.sub_dim)
    except RankDeficient as exc:
        timings["pca"] = time.perf_counter() - t0
        return None, state, BatchDiagnostics(step_seconds=timings, error=str(exc))
    timings["pca"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    mean_state = state.mean_state
    if cfg.use_gmean:
        if mean_state is None:
            mean_state = init_mean(batch_subspace)
        else:
            mean_state = update_mean(mean_state, batch_subspace)
        target = mean_state.mean
    else:
        target = batch_subspace
    timings["mean"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    kernel = state.last_kernel
    x_adapted = x_pre
    if cfg.use_gfk:
        kernel = flow_kernel(state.source_subspace, state.source_complement, target)
        x_adapted = apply_transform(x_pre, kernel)
    timings["gfk"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    predictions = predict(state.model, x_adapted)
    timings["predict"] = time.perf_counter() - t0

    diag = BatchDiagnostics(step_seconds=timings)
    if cfg.diagnostics:
        angles = principal_angles(state.source_subspace, target)
        diag.target_angles = angles
        diag.near_orthogonal = bool(angles.max() > NEAR_ORTHOGONAL_ANGLE)

    new_state = replace(
        state,
        mean_state=mean_state,
        last_kernel=kernel,
        batch_count=state.batch_count + 1,
    )
    return predictions, new_state, diag


@dataclass(frozen=True, eq=False)
class AccuracyTrace:
    """Per-batch and running accuracies for one stream run.

    ``per_batch[n]`` is None when batch n was skipped; ``running[n]`` averages
    the scored batches so far and is None until the first one succeeds.
    """

    per_batch: tuple[float | None, ...]
    running: tuple[float | None, ...]
    seconds_per_batch: tuple[float, ...]
    step_seconds: dict[str, float] = field(default_factory=dict)

    @property
    def final(self) -> float | None:
        return self.running[-1] if self.running else None


def run_stream(
    source: LabeledSet,
    stream: list[MiniBatch] | tuple[MiniBatch, ...],
    config: PipelineConfig,
) -> AccuracyTrace:
    """Drive the pipeline over a whole stream and score each batch.

    Every batch must carry true labels; they are used for scoring only and
    never reach the pipeline steps.
    """
    state = init_pipeline(source, config)
    per_batch: list[float | None] = []
    running: list[float | None] = []
    seconds: list[float] = []
    step_totals = dict.fromkeys(STEP_NAMES, 0.0)
    scored_sum = 0.0
    scored_n = 0
    for batch in stream:
        if batch.true_labels is None:
            raise ValueError("stream batches must carry true_labels for scoring")
        t0 = time.perf_counter()
        predictions, state, diag = process_batch(state, batch)
        seconds.append(time.perf_counter() - t0)
        for name in STEP_NAMES:
            step_totals[name] += diag.step_seconds.get(name, 0.0)
        if predictions is None:
            per_batch.append(None)
        else:
            accuracy = float(np.mean(predictions == batch.true_labels))
            per_batch.append(accuracy)
            scored_sum += accuracy
            scored_n += 1
        running.append(scored_sum / scored_n if scored_n else None)
    return AccuracyTrace(
        per_batch=tuple(per_batch),
        running=tuple(running),
        seconds_per_batch=tuple(seconds),
        step_seconds=step_totals,
    )
