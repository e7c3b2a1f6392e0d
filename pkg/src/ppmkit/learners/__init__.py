"""From-scratch learners behind a uniform train/predict/update surface."""
from .base import (
    FAMILIES,
    UPDATABLE_ALGORITHMS,
    ClusteringSpec,
    ModelSpec,
    Prediction,
    TrainedModel,
    check_schema,
    load_model,
    predict,
    raw_outputs,
    save_model,
    train,
    update,
)
from .clustering import CompositeModel, kmeans
from .spaces import ALGORITHMS, DEFAULTS, SPACES, Choice, IntRange, RealRange, validate_assignment

__all__ = [
    "ALGORITHMS",
    "DEFAULTS",
    "FAMILIES",
    "SPACES",
    "UPDATABLE_ALGORITHMS",
    "Choice",
    "ClusteringSpec",
    "CompositeModel",
    "IntRange",
    "ModelSpec",
    "Prediction",
    "RealRange",
    "TrainedModel",
    "check_schema",
    "kmeans",
    "load_model",
    "predict",
    "raw_outputs",
    "save_model",
    "train",
    "update",
    "validate_assignment",
]
