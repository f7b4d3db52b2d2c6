"""Source-trained classifiers used downstream of the subspace transform.

Both models are deliberately simple and fully deterministic: a majority-vote
k-nearest-neighbour rule and a one-vs-rest linear SVM trained by seeded
stochastic subgradient descent on the hinge loss with step size 1/(lambda t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InsufficientData, SchemaMismatch

Array = np.ndarray


def _read_only(a: Array, dtype) -> Array:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """Rows x (N x d) with integer labels y in {0, ..., c-1}, every class present."""

    x: Array
    y: Array

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DimensionMismatch(f"x must be a nonempty 2-d array, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("x has non-finite entries")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise DimensionMismatch(f"y must have one label per row, got {y.shape} for {x.shape[0]} rows")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(y == y.astype(np.int64)):
                raise SchemaMismatch("labels must be integers")
        y = y.astype(np.int64)
        if y.min() < 0:
            raise SchemaMismatch(f"labels must be >= 0, got {y.min()}")
        present = np.unique(y)
        if present.shape[0] != int(y.max()) + 1:
            missing = sorted(set(range(int(y.max()) + 1)) - set(present.tolist()))
            raise SchemaMismatch(f"labels must be contiguous from 0; missing {missing}")
        object.__setattr__(self, "x", _read_only(x, np.float64))
        object.__setattr__(self, "y", _read_only(y, np.int64))

    @property
    def n_rows(self) -> int:
        return int(self.x.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.x.shape[1])

    @property
    def n_classes(self) -> int:
        return int(self.y.max()) + 1


@dataclass(frozen=True)
class KnnParams:
    """Neighbour count for the majority-vote rule."""

    n_neighbors: int = 1


@dataclass(frozen=True)
class SvmParams:
    """Hinge-loss SGD settings: regularization strength, passes, and rng seed."""

    regularization: float = 1e-4
    epochs: int = 100
    seed: int = 0


@dataclass(frozen=True, eq=False)
class KnnModel:
    train_x: Array
    train_y: Array
    n_neighbors: int
    n_classes: int


@dataclass(frozen=True, eq=False)
class LinearSvmModel:
    weights: Array  # c x d
    biases: Array   # c


def train(data: LabeledSet, kind: str, params: KnnParams | SvmParams | None = None):
    """Fit a classifier of the given kind ("knn" or "svm") on labelled rows."""
    if data.n_classes < 2:
        raise InsufficientData("training needs at least two classes")
    if kind == "knn":
        params = params if params is not None else KnnParams()
        if params.n_neighbors < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {params.n_neighbors}")
        if data.n_rows < params.n_neighbors:
            raise InsufficientData(f"{data.n_rows} rows < {params.n_neighbors} neighbours")
        return KnnModel(
            train_x=data.x,
            train_y=data.y,
            n_neighbors=int(params.n_neighbors),
            n_classes=data.n_classes,
        )
    if kind in ("svm", "linear_svm"):
        params = params if params is not None else SvmParams()
        counts = np.bincount(data.y, minlength=data.n_classes)
        if counts.min() < 2:
            raise InsufficientData(f"every class needs >= 2 rows, got counts {counts.tolist()}")
        return _train_linear_svm(data, params)
    raise ValueError(f"unknown classifier kind {kind!r}")


def _train_linear_svm(data: LabeledSet, params: SvmParams) -> LinearSvmModel:
    lam = float(params.regularization)
    if lam <= 0.0:
        raise ValueError(f"regularization must be positive, got {lam}")
    rng = np.random.default_rng(params.seed)
    n, d = data.x.shape
    c = data.n_classes
    # Constant-feature augmentation keeps the bias inside the shrinking
    # weight vector, which keeps the 1/(lambda t) schedule stable.
    aug = np.hstack([data.x, np.ones((n, 1))])
    weights = np.zeros((c, d))
    biases = np.zeros(c)
    for cls in range(c):
        signs = np.where(data.y == cls, 1.0, -1.0)
        w = np.zeros(d + 1)
        t = 0
        for _ in range(params.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (lam * t)
                margin = signs[i] * float(w @ aug[i])
                w *= 1.0 - eta * lam
                if margin < 1.0:
                    w += (eta * signs[i]) * aug[i]
        weights[cls] = w[:d]
        biases[cls] = w[d]
    return LinearSvmModel(weights=_read_only(weights, np.float64), biases=_read_only(biases, np.float64))


def predict(model, x: object) -> Array:
    """Predicted labels for query rows x (M x d)."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"queries must be a 2-d array, got shape {a.shape}")
    if isinstance(model, KnnModel):
        if a.shape[1] != model.train_x.shape[1]:
            raise DimensionMismatch(f"queries have {a.shape[1]} features, model expects {model.train_x.shape[1]}")
        return _knn_predict(model, a)
    if isinstance(model, LinearSvmModel):
        if a.shape[1] != model.weights.shape[1]:
            raise DimensionMismatch(f"queries have {a.shape[1]} features, model expects {model.weights.shape[1]}")
        scores = a @ model.weights.T + model.biases
        # argmax returns the first maximum: score ties go to the smaller class.
        return np.argmax(scores, axis=1).astype(np.int64)
    raise TypeError(f"unknown model type {type(model).__name__}")


def _knn_predict(model: KnnModel, queries: Array) -> Array:
    # Squared distances via the expansion |q|^2 - 2 q.p + |p|^2.
    q_sq = np.sum(queries**2, axis=1)[:, None]
    p_sq = np.sum(model.train_x**2, axis=1)[None, :]
    d_sq = q_sq + p_sq - 2.0 * (queries @ model.train_x.T)
    # Stable sort keeps boundary distance ties in training-row order.
    order = np.argsort(d_sq, axis=1, kind="stable")[:, : model.n_neighbors]
    votes = model.train_y[order]
    counts = np.zeros((queries.shape[0], model.n_classes), dtype=np.int64)
    np.add.at(counts, (np.arange(queries.shape[0])[:, None], votes), 1)
    # argmax returns the first maximum: vote ties go to the smaller class.
    return np.argmax(counts, axis=1).astype(np.int64)
