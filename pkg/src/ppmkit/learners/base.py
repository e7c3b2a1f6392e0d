"""Model specification, training, prediction, update, and persistence.

Classification models always expose ``classes = sorted(set(labels))`` and
return a dense score matrix whose rows sum to 1; the predicted label is the
argmax, with score ties resolved toward the lower class index.  Regression
models return one float per row.

An optional k-means clustering stage wraps any algorithm into a composite:
rows are clustered, one submodel per cluster is trained (seeded from the
composite seed plus the cluster index), and prediction routes through the
nearest centroid.  Submodels share the global class list, so a cluster that
happens to be single-class still emits full-width scores.
"""
from __future__ import annotations

import pickle
import time
from dataclasses import dataclass, field

import numpy as np

from ..encoding import FeatureMatrix
from ..errors import SchemaMismatchError, UnsupportedError, ValidationError
from ..util import digest_of
from .boosting import GradientBoosting
from .clustering import CompositeModel
from .forest import RandomForest
from .knn import KNearest
from .sgd import LinearSGD
from .spaces import ALGORITHMS, domain_from_dict, domain_to_dict, is_domain, resolve_assignment
from .tree import DecisionTree

FAMILIES = ("classification", "regression")

MODEL_FORMAT = "ppmkit-model"
MODEL_FORMAT_VERSION = 1

UPDATABLE_ALGORITHMS = ("linear_sgd",)


@dataclass(frozen=True)
class ClusteringSpec:
    method: str = "kmeans"
    k: int = 2

    def __post_init__(self):
        if self.method != "kmeans":
            raise ValidationError(f"unknown clustering method {self.method!r}")
        if self.k < 1:
            raise ValidationError("clustering k must be >= 1")

    def to_dict(self) -> dict:
        return {"method": self.method, "k": self.k}

    @staticmethod
    def from_dict(data: dict) -> "ClusteringSpec":
        return ClusteringSpec(method=data.get("method", "kmeans"), k=int(data.get("k", 2)))


@dataclass(frozen=True)
class ModelSpec:
    family: str
    algorithm: str
    hyperparameters: dict = field(default_factory=dict)
    clustering: ClusteringSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown model family {self.family!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {self.algorithm!r}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")
        resolve_assignment(self.algorithm, self.hyperparameters)  # raises on bad names/values

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "algorithm": self.algorithm,
            "hyperparameters": {k: domain_to_dict(v) for k, v in self.hyperparameters.items()},
            "clustering": self.clustering.to_dict() if self.clustering else None,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(data: dict) -> "ModelSpec":
        clustering = data.get("clustering")
        return ModelSpec(
            family=data["family"],
            algorithm=data["algorithm"],
            hyperparameters={
                k: domain_from_dict(v) for k, v in data.get("hyperparameters", {}).items()
            },
            clustering=ClusteringSpec.from_dict(clustering) if clustering else None,
            seed=int(data.get("seed", 0)),
        )

    def with_hyperparameters(self, assignment: dict) -> "ModelSpec":
        return ModelSpec(
            family=self.family,
            algorithm=self.algorithm,
            hyperparameters=dict(assignment),
            clustering=self.clustering,
            seed=self.seed,
        )


@dataclass(frozen=True)
class Prediction:
    family: str
    classes: tuple[str, ...] | None
    scores: np.ndarray | None  # (n, C), rows sum to 1
    values: np.ndarray | None  # (n,)
    labels: tuple | None  # argmax labels for classification

    def __len__(self) -> int:
        target = self.scores if self.scores is not None else self.values
        return 0 if target is None else len(target)

    def to_dict(self) -> dict:
        if self.family == "classification":
            return {
                "family": self.family,
                "classes": list(self.classes or ()),
                "scores": [] if self.scores is None else self.scores.tolist(),
                "labels": list(self.labels or ()),
            }
        return {
            "family": self.family,
            "values": [] if self.values is None else self.values.tolist(),
        }


@dataclass
class TrainedModel:
    spec: ModelSpec
    feature_names: tuple[str, ...]
    classes: tuple[str, ...] | None
    predictor: object
    resolved_hyperparameters: dict
    encoder_ref: str = ""
    config_fingerprint: str = ""
    training_time: float = 0.0

    def predict(self, matrix: FeatureMatrix) -> Prediction:
        return predict(self, matrix)


def _build_predictor(spec: ModelSpec, hp: dict, n_classes: int, seed: int):
    task = spec.family
    if spec.algorithm == "decision_tree":
        # a fixed-seed generator so signatures line up; plain trees never draw
        return DecisionTree(
            task=task,
            max_depth=hp["max_depth"],
            min_samples_split=hp["min_samples_split"],
            n_classes=n_classes,
        )
    if spec.algorithm == "random_forest":
        return RandomForest(
            task=task,
            n_trees=hp["n_trees"],
            max_depth=hp["max_depth"],
            min_samples_split=hp["min_samples_split"],
            max_features=hp["max_features"],
            bootstrap=hp["bootstrap"],
            n_classes=n_classes,
            seed=seed,
        )
    if spec.algorithm == "gradient_boosted_trees":
        return GradientBoosting(
            task=task,
            n_rounds=hp["n_rounds"],
            learning_rate=hp["learning_rate"],
            max_depth=hp["max_depth"],
            n_classes=n_classes,
            seed=seed,
        )
    if spec.algorithm == "linear_sgd":
        return LinearSGD(
            task=task,
            learning_rate=hp["learning_rate"],
            epochs=hp["epochs"],
            l2=hp["l2"],
            n_classes=n_classes,
        )
    if spec.algorithm == "knn":
        return KNearest(task=task, k=hp["k"], n_classes=n_classes)
    raise ValidationError(f"unknown algorithm {spec.algorithm!r}")


def train(
    matrix: FeatureMatrix,
    spec: ModelSpec,
    *,
    encoder_ref: str = "",
    config_fingerprint: str = "",
) -> TrainedModel:
    """Fit a model on the matrix; deterministic given the spec's seed.

    Classification requires string labels with at least two classes;
    regression requires finite float labels.
    """
    if len(matrix) == 0:
        raise ValidationError("cannot train on an empty matrix")

    if spec.family == "classification":
        if not all(isinstance(l, str) for l in matrix.labels):
            raise ValidationError("classification training needs string labels")
        classes = tuple(sorted(set(matrix.labels)))
        if len(classes) < 2:
            raise ValidationError(
                f"degenerate target: every training row has label {matrix.labels[0]!r}"
            )
        index = {c: i for i, c in enumerate(classes)}
        y = np.array([index[l] for l in matrix.labels], dtype=int)
        n_classes = len(classes)
    else:
        if not all(isinstance(l, (int, float)) and not isinstance(l, bool) for l in matrix.labels):
            raise ValidationError("regression training needs numeric labels")
        y = np.asarray(matrix.labels, dtype=float)
        if not np.all(np.isfinite(y)):
            raise ValidationError("regression labels must be finite")
        classes = None
        n_classes = 0

    hp = resolve_assignment(spec.algorithm, spec.hyperparameters)
    for name, value in hp.items():
        if is_domain(value):
            raise ValidationError(
                f"hyperparameter {name!r} is a search domain; run the optimizer"
                " or pick a concrete value"
            )
    if spec.algorithm == "knn" and hp["k"] > len(matrix):
        raise ValidationError(f"k={hp['k']} exceeds the {len(matrix)} training rows")

    if spec.clustering is not None:
        if spec.clustering.k > len(matrix):
            raise ValidationError(
                f"clustering k={spec.clustering.k} exceeds the {len(matrix)} training rows"
            )
        predictor: object = CompositeModel(
            task=spec.family,
            k=spec.clustering.k,
            seed=spec.seed,
            submodel_factory=lambda c: _build_predictor(spec, hp, n_classes, spec.seed + c + 1),
            n_classes=n_classes,
        )
    else:
        predictor = _build_predictor(spec, hp, n_classes, spec.seed)

    started = time.perf_counter()
    predictor.fit(matrix.rows, y)  # type: ignore[attr-defined]
    elapsed = time.perf_counter() - started

    if not config_fingerprint:
        config_fingerprint = digest_of(
            {"model": spec.to_dict(), "encoder_ref": encoder_ref, "adhoc": True}
        )
    return TrainedModel(
        spec=spec,
        feature_names=matrix.feature_names,
        classes=classes,
        predictor=predictor,
        resolved_hyperparameters=hp,
        encoder_ref=encoder_ref,
        config_fingerprint=config_fingerprint,
        training_time=elapsed,
    )


def check_schema(model: TrainedModel, matrix: FeatureMatrix) -> None:
    if matrix.feature_names == model.feature_names:
        return
    expected, got = model.feature_names, matrix.feature_names
    if len(expected) != len(got):
        raise SchemaMismatchError(
            f"matrix has {len(got)} features, model was trained on {len(expected)}"
        )
    for i, (e, g) in enumerate(zip(expected, got)):
        if e != g:
            raise SchemaMismatchError(f"feature {i} is {g!r}, model expects {e!r}")
    raise SchemaMismatchError("feature names differ")


def raw_outputs(model: TrainedModel, rows: np.ndarray) -> np.ndarray:
    """Scores (classification) or values (regression) for pre-validated rows.

    Internal fast path: no schema check, no Prediction wrapper.  Explanation
    code calls this in bulk.
    """
    if model.spec.family == "classification":
        scores = model.predictor.predict_scores(rows)  # type: ignore[attr-defined]
        totals = scores.sum(axis=1, keepdims=True)
        safe = np.where(totals <= 0, 1.0, totals)
        scores = np.where(totals <= 0, 1.0 / scores.shape[1], scores / safe)
        return scores
    return model.predictor.predict_values(rows)  # type: ignore[attr-defined]


def predict(model: TrainedModel, matrix: FeatureMatrix) -> Prediction:
    """Score a matrix; the matrix schema must match the training schema."""
    check_schema(model, matrix)
    if len(matrix) == 0:
        empty = np.zeros((0, len(model.classes or ()))), np.zeros(0)
        if model.spec.family == "classification":
            return Prediction(
                family="classification", classes=model.classes, scores=empty[0], values=None, labels=()
            )
        return Prediction(family="regression", classes=None, scores=None, values=empty[1], labels=None)

    out = raw_outputs(model, matrix.rows)
    if model.spec.family == "classification":
        picks = np.argmax(out, axis=1)  # first max = lowest class index
        labels = tuple(model.classes[i] for i in picks)  # type: ignore[index]
        return Prediction(
            family="classification", classes=model.classes, scores=out, values=None, labels=labels
        )
    return Prediction(family="regression", classes=None, scores=None, values=out, labels=None)


def update(model: TrainedModel, matrix: FeatureMatrix) -> TrainedModel:
    """Additional gradient passes for SGD-family models.

    An empty matrix is the identity.  Other algorithms reject the call.
    Classification updates must not introduce unseen labels (the score
    width is part of the model's contract).
    """
    if len(matrix) == 0:
        return model
    if model.spec.algorithm not in UPDATABLE_ALGORITHMS:
        raise UnsupportedError(
            f"algorithm {model.spec.algorithm!r} does not support incremental updates"
        )
    check_schema(model, matrix)

    predictor: LinearSGD = model.predictor  # type: ignore[assignment]
    if model.spec.family == "classification":
        unseen = sorted(set(matrix.labels) - set(model.classes or ()))
        if unseen:
            raise ValidationError(f"update introduces unseen classes: {unseen}")
        index = {c: i for i, c in enumerate(model.classes)}  # type: ignore[arg-type]
        y = np.array([index[l] for l in matrix.labels], dtype=int)
    else:
        y = np.asarray(matrix.labels, dtype=float)

    started = time.perf_counter()
    predictor.continue_fit(matrix.rows, y, predictor.epochs)
    elapsed = time.perf_counter() - started
    return TrainedModel(
        spec=model.spec,
        feature_names=model.feature_names,
        classes=model.classes,
        predictor=predictor,
        resolved_hyperparameters=model.resolved_hyperparameters,
        encoder_ref=model.encoder_ref,
        config_fingerprint=model.config_fingerprint,
        training_time=model.training_time + elapsed,
    )


def save_model(model: TrainedModel, path, extra: dict | None = None) -> None:
    """Pickle with a format header so stale or foreign files fail loudly."""
    blob = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "model": model,
        "extra": extra or {},
    }
    with open(path, "wb") as fh:
        pickle.dump(blob, fh)


def load_model(path) -> tuple[TrainedModel, dict]:
    with open(path, "rb") as fh:
        blob = pickle.load(fh)
    if not isinstance(blob, dict) or blob.get("format") != MODEL_FORMAT:
        raise ValidationError(f"{path} is not a saved model")
    if blob.get("version") != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"saved model version {blob.get('version')} unsupported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    return blob["model"], blob["extra"]
