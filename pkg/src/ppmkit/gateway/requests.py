"""Wire documents shared by the HTTP API and the CLI.

Both surfaces parse the same JSON shapes through the same functions, so a
request submitted over either produces byte-identical job configs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..encoding import ENCODING_METHODS, EncodingSpec
from ..errors import ValidationError
from ..eventlog import AttributeValue, Event, Trace, parse_timestamp
from ..hpo import OptimSpec
from ..labeling import LabelSpec
from ..learners.base import ClusteringSpec, ModelSpec
from ..learners.spaces import ALGORITHMS, domain_from_dict, domain_to_dict
from ..orchestration import JobConfig
from ..splitting import PrefixSpec

PREDICTION_METHODS = ("outcome", "numeric", "next_activity")

_METHOD_KINDS = {
    "outcome": ("categorical_attribute", "duration_binary", "numeric_attribute_binary"),
    "numeric": ("remaining_time", "duration_value", "numeric_attribute_value"),
    "next_activity": ("next_activity",),
}


def _prefix_sort_key(spec: PrefixSpec):
    return (spec.mode, spec.length, spec.short_traces)


def prefix_descriptor(spec: PrefixSpec) -> str:
    base = f"{spec.mode}:{spec.length}"
    return base + ":pad" if spec.short_traces == "zero_pad" else base


@dataclass(frozen=True)
class TrainingRequest:
    """One form submission: the cartesian axes plus the shared settings."""

    split_key: str
    prediction_method: str
    algorithms: tuple[str, ...]
    encodings: tuple[str, ...]
    prefix_specs: tuple[PrefixSpec, ...]
    label: LabelSpec
    clustering: ClusteringSpec | None = None
    optim: OptimSpec = field(default_factory=OptimSpec)
    intercase: bool = False
    hyperparameters: dict = field(default_factory=dict)  # algorithm -> assignment
    seed: int = 0

    def __post_init__(self):
        if not self.split_key:
            raise ValidationError("split_key must be non-empty")
        if self.prediction_method not in PREDICTION_METHODS:
            raise ValidationError(
                f"unknown prediction method {self.prediction_method!r}"
            )
        for name, values in (
            ("algorithms", self.algorithms),
            ("encodings", self.encodings),
            ("prefix_specs", self.prefix_specs),
        ):
            if not values:
                raise ValidationError(f"{name} must be non-empty")
        for algorithm in self.algorithms:
            if algorithm not in ALGORITHMS:
                raise ValidationError(f"unknown algorithm {algorithm!r}")
        for encoding in self.encodings:
            if encoding not in ENCODING_METHODS:
                raise ValidationError(f"unknown encoding {encoding!r}")
        allowed = _METHOD_KINDS[self.prediction_method]
        if self.label.kind not in allowed:
            raise ValidationError(
                f"label kind {self.label.kind!r} does not belong to the"
                f" {self.prediction_method!r} prediction method"
            )
        for algorithm in self.hyperparameters:
            if algorithm not in self.algorithms:
                raise ValidationError(
                    f"hyperparameters given for {algorithm!r}, which is not requested"
                )

    @staticmethod
    def from_dict(data: dict) -> "TrainingRequest":
        clustering = data.get("clustering")
        hyper = {
            algorithm: {
                name: domain_from_dict(value) for name, value in assignment.items()
            }
            for algorithm, assignment in (data.get("hyperparameters") or {}).items()
        }
        return TrainingRequest(
            split_key=data.get("split_key", ""),
            prediction_method=data.get("prediction_method", ""),
            algorithms=tuple(sorted(set(data.get("algorithms", ())))),
            encodings=tuple(sorted(set(data.get("encodings", ())))),
            prefix_specs=tuple(
                sorted(
                    {PrefixSpec.from_dict(p) for p in data.get("prefix_specs", ())},
                    key=_prefix_sort_key,
                )
            ),
            label=LabelSpec.from_dict(data["label"]),
            clustering=ClusteringSpec.from_dict(clustering) if clustering else None,
            optim=OptimSpec.from_dict(data.get("optim") or {}),
            intercase=bool(data.get("intercase", False)),
            hyperparameters=hyper,
            seed=int(data.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "split_key": self.split_key,
            "prediction_method": self.prediction_method,
            "algorithms": list(self.algorithms),
            "encodings": list(self.encodings),
            "prefix_specs": [p.to_dict() for p in self.prefix_specs],
            "label": self.label.to_dict(),
            "clustering": self.clustering.to_dict() if self.clustering else None,
            "optim": self.optim.to_dict(),
            "intercase": self.intercase,
            "hyperparameters": {
                algorithm: {name: domain_to_dict(value) for name, value in assignment.items()}
                for algorithm, assignment in self.hyperparameters.items()
            },
            "seed": self.seed,
        }


def expand_training_request(request: TrainingRequest) -> list[JobConfig]:
    """Cartesian product of the three axes, in lexicographic order.

    Every config shares the split, label, clustering, and optimizer settings;
    the task identity string names the axis choice and is pairwise distinct.
    """
    family = request.label.task
    configs = []
    for algorithm in sorted(set(request.algorithms)):
        model = ModelSpec(
            family=family,
            algorithm=algorithm,
            hyperparameters=dict(request.hyperparameters.get(algorithm, {})),
            clustering=request.clustering,
            seed=request.seed,
        )
        for encoding in sorted(set(request.encodings)):
            for prefix in sorted(set(request.prefix_specs), key=_prefix_sort_key):
                descriptor = prefix_descriptor(prefix)
                configs.append(
                    JobConfig(
                        split_key=request.split_key,
                        prefix=prefix,
                        label=request.label,
                        encoding=EncodingSpec(
                            method=encoding,
                            padded_length=prefix.length,
                            intercase=request.intercase,
                        ),
                        model=model,
                        optim=request.optim,
                        task_identity=f"{algorithm}|{encoding}|{descriptor}",
                    )
                )
    return configs


def _attribute_from_wire(value) -> AttributeValue:
    """Typed attribute from a JSON scalar or an explicit {kind, value} pair."""
    if isinstance(value, dict):
        kind = value.get("kind")
        raw = value.get("value")
        if kind == "timestamp":
            return AttributeValue("timestamp", parse_timestamp(str(raw)))
        if kind in ("string", "integer", "real", "boolean"):
            caster = {
                "string": str, "integer": int, "real": float, "boolean": bool,
            }[kind]
            return AttributeValue(kind, caster(raw))
        raise ValidationError(f"unknown attribute kind {kind!r}")
    if isinstance(value, bool):
        return AttributeValue("boolean", value)
    if isinstance(value, int):
        return AttributeValue("integer", value)
    if isinstance(value, float):
        return AttributeValue("real", value)
    return AttributeValue("string", str(value))


def trace_from_document(doc: dict) -> Trace:
    """Build a trace from its JSON document form.

    Events are sorted by timestamp (stable), mirroring how stored logs are
    parsed, so a round-tripped trace predicts identically.
    """
    if not isinstance(doc, dict):
        raise ValidationError("trace document must be an object")
    events_doc = doc.get("events") or ()
    if not events_doc:
        raise ValidationError("trace document needs at least one event")
    events = []
    for entry in events_doc:
        if "activity" not in entry or "timestamp" not in entry:
            raise ValidationError("every event needs an activity and a timestamp")
        events.append(
            Event(
                activity=str(entry["activity"]),
                timestamp=parse_timestamp(str(entry["timestamp"])),
                resource=(None if entry.get("resource") is None
                          else str(entry["resource"])),
                payload={
                    k: _attribute_from_wire(v)
                    for k, v in (entry.get("payload") or {}).items()
                },
            )
        )
    events.sort(key=lambda e: e.timestamp)
    return Trace(
        id=str(doc.get("id") or "adhoc"),
        events=tuple(events),
        trace_attrs={
            k: _attribute_from_wire(v) for k, v in (doc.get("attrs") or {}).items()
        },
    )
