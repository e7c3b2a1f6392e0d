"""Job orchestration: durable store, artifact cache, worker pool, facade."""
from .cache import KINDS, ArtifactCache
from .jobs import JOB_STATUSES, TRANSITIONS, JobConfig, JobRecord, new_job_id
from .pipeline import (
    LabeledArtifact,
    build_labeled_artifact,
    config_fingerprint,
    execute_job,
    labeled_matrix_key,
    load_split_part,
    loaded_log_key,
    trained_model_key,
)
from .service import Service, ServiceConfig, validate_job_config
from .store import Store
from .worker import WorkerPool

__all__ = [
    "ArtifactCache",
    "JobConfig",
    "JobRecord",
    "JOB_STATUSES",
    "KINDS",
    "LabeledArtifact",
    "Service",
    "ServiceConfig",
    "Store",
    "TRANSITIONS",
    "WorkerPool",
    "build_labeled_artifact",
    "config_fingerprint",
    "execute_job",
    "labeled_matrix_key",
    "load_split_part",
    "loaded_log_key",
    "new_job_id",
    "trained_model_key",
    "validate_job_config",
]
