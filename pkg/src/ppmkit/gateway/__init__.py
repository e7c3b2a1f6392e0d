"""HTTP API and request-expansion layer shared with the CLI."""
from .api import API_PREFIX, create_app, create_app_from_env
from .requests import (
    PREDICTION_METHODS,
    TrainingRequest,
    expand_training_request,
    prefix_descriptor,
    trace_from_document,
)

__all__ = [
    "API_PREFIX",
    "PREDICTION_METHODS",
    "TrainingRequest",
    "create_app",
    "create_app_from_env",
    "expand_training_request",
    "prefix_descriptor",
    "trace_from_document",
]
