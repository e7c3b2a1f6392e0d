"""Job configuration and lifecycle records.

A job is one full pipeline run: split -> prefix -> label -> encode ->
train/optimize -> evaluate.  Its config document is the unit of validation,
caching, and auditing.
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass, field

from ..encoding import EncodingSpec
from ..errors import ValidationError
from ..hpo import OptimSpec
from ..labeling import LabelSpec
from ..learners import ModelSpec
from ..splitting import PrefixSpec
from ..util import digest_of

JOB_STATUSES = ("created", "queued", "running", "completed", "error")

# legal lifecycle edges; anything else indicates a bookkeeping bug
TRANSITIONS = {
    "created": {"queued"},
    "queued": {"running"},
    "running": {"completed", "error"},
    "completed": set(),
    "error": set(),
}


def new_job_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class JobConfig:
    """Everything a worker needs to execute one pipeline."""

    split_key: str
    prefix: PrefixSpec
    label: LabelSpec
    encoding: EncodingSpec
    model: ModelSpec
    optim: OptimSpec = field(default_factory=OptimSpec)
    task_identity: str = ""

    def __post_init__(self):
        if not self.split_key:
            raise ValidationError("job config needs a split_key")
        if self.label.task != self.model.family:
            raise ValidationError(
                f"label kind {self.label.kind!r} produces a {self.label.task} target"
                f" but the model family is {self.model.family}"
            )

    def to_dict(self) -> dict:
        return {
            "split_key": self.split_key,
            "prefix": self.prefix.to_dict(),
            "label": self.label.to_dict(),
            "encoding": self.encoding.to_dict(),
            "model": self.model.to_dict(),
            "optim": self.optim.to_dict(),
            "task_identity": self.task_identity,
        }

    @staticmethod
    def from_dict(data: dict) -> "JobConfig":
        return JobConfig(
            split_key=data["split_key"],
            prefix=PrefixSpec.from_dict(data["prefix"]),
            label=LabelSpec.from_dict(data["label"]),
            encoding=EncodingSpec.from_dict(data["encoding"]),
            model=ModelSpec.from_dict(data["model"]),
            optim=OptimSpec.from_dict(data.get("optim", {})),
            task_identity=data.get("task_identity", ""),
        )

    @property
    def digest(self) -> str:
        return digest_of(self.to_dict())


@dataclass(frozen=True)
class JobRecord:
    id: str
    status: str
    config: JobConfig
    result: list | None = None
    error_detail: str | None = None
    timestamps: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "config": self.config.to_dict(),
            "result": self.result,
            "error_detail": self.error_detail,
            "timestamps": dict(self.timestamps),
        }
