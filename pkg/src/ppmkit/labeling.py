"""Turn prefix instances into supervised examples.

Classification targets are strings, regression targets are floats.  Binary
targets derived from a quantity use the labels "true" (at or below the
threshold, i.e. fast/small) and "false".  Next-activity prediction uses the
reserved class "__END__" for prefixes that already cover the whole trace.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .eventlog import AttributeValue, EventLog
from .splitting import PrefixInstance

END_CLASS = "__END__"
POSITIVE_LABEL = "true"
NEGATIVE_LABEL = "false"

CLASSIFICATION_KINDS = (
    "categorical_attribute",
    "next_activity",
    "duration_binary",
    "numeric_attribute_binary",
)
REGRESSION_KINDS = ("remaining_time", "duration_value", "numeric_attribute_value")
LABEL_KINDS = CLASSIFICATION_KINDS + REGRESSION_KINDS

_ATTRIBUTE_KINDS = (
    "categorical_attribute",
    "numeric_attribute_binary",
    "numeric_attribute_value",
)
_BINARY_KINDS = ("duration_binary", "numeric_attribute_binary")


@dataclass(frozen=True)
class LabelSpec:
    """What to predict.

    kind / task pairs:
      - categorical_attribute, next_activity, duration_binary,
        numeric_attribute_binary -> classification
      - remaining_time, duration_value, numeric_attribute_value -> regression

    Binary kinds need a threshold: either threshold="custom" with an explicit
    threshold_value, or threshold="log_mean" which resolves to the arithmetic
    mean of the underlying quantity over the training traces.
    """

    kind: str
    attribute: str | None = None
    threshold: str | None = None  # "custom" | "log_mean"
    threshold_value: float | None = None

    def __post_init__(self):
        if self.kind not in LABEL_KINDS:
            raise ValidationError(f"unknown label kind {self.kind!r}")
        if self.kind in _ATTRIBUTE_KINDS and not self.attribute:
            raise ValidationError(f"label kind {self.kind} requires an attribute name")
        if self.kind in _BINARY_KINDS:
            if self.threshold not in ("custom", "log_mean"):
                raise ValidationError(f"label kind {self.kind} requires threshold custom or log_mean")
            if self.threshold == "custom" and self.threshold_value is None:
                raise ValidationError("custom threshold requires threshold_value")
        elif self.threshold is not None:
            raise ValidationError(f"label kind {self.kind} does not take a threshold")

    @property
    def task(self) -> str:
        return "classification" if self.kind in CLASSIFICATION_KINDS else "regression"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "attribute": self.attribute,
            "threshold": self.threshold,
            "threshold_value": self.threshold_value,
        }

    @staticmethod
    def from_dict(data: dict) -> "LabelSpec":
        return LabelSpec(
            kind=data["kind"],
            attribute=data.get("attribute"),
            threshold=data.get("threshold"),
            threshold_value=data.get("threshold_value"),
        )


@dataclass(frozen=True)
class LabeledInstance:
    instance: PrefixInstance
    label: object  # str for classification, float for regression


def _numeric_attr(attrs: dict[str, AttributeValue], name: str, owner: str) -> float:
    attr = attrs[name]
    if attr.kind == "integer" or attr.kind == "real":
        return float(attr.value)  # type: ignore[arg-type]
    raise ValidationError(f"attribute {name!r} on {owner} has kind {attr.kind}, expected numeric")


def resolve_threshold(train_log: EventLog, spec: LabelSpec) -> float:
    """Resolve a log_mean threshold against the training traces.

    Custom thresholds pass through.  The mean is taken over traces that carry
    the quantity; an attribute absent from every trace is an error.
    """
    if spec.threshold == "custom":
        return float(spec.threshold_value)  # type: ignore[arg-type]
    if spec.threshold != "log_mean":
        raise ValidationError(f"label kind {spec.kind} has no threshold to resolve")
    if spec.kind == "duration_binary":
        values = [t.duration_seconds for t in train_log.traces]
    else:
        values = [
            _numeric_attr(t.trace_attrs, spec.attribute, f"trace {t.id!r}")  # type: ignore[arg-type]
            for t in train_log.traces
            if spec.attribute in t.trace_attrs
        ]
    if not values:
        raise ValidationError(f"attribute {spec.attribute!r} absent from every training trace")
    return sum(values) / len(values)


def attr_label_text(attr: AttributeValue) -> str:
    return attr.as_text()


def apply_labels(
    instances: list[PrefixInstance],
    log: EventLog,
    spec: LabelSpec,
    threshold: float | None = None,
) -> list[LabeledInstance]:
    """Label every instance, or fail listing every offending trace.

    The log must contain each instance's source trace (labels that look into
    the future — next activity, remaining time, duration — need the whole
    trace, not just the prefix).  Binary kinds require a resolved threshold.
    """
    if spec.kind in _BINARY_KINDS and threshold is None:
        raise ValidationError(f"label kind {spec.kind} requires a resolved threshold")

    missing_traces = sorted({i.trace_id for i in instances if log.trace(i.trace_id) is None})
    if missing_traces:
        raise ValidationError(f"instances reference traces absent from the log: {missing_traces}")

    out: list[LabeledInstance] = []
    missing_attr: list[str] = []
    for inst in instances:
        trace = log.trace(inst.trace_id)
        assert trace is not None
        if spec.kind in _ATTRIBUTE_KINDS and spec.attribute not in trace.trace_attrs:
            missing_attr.append(trace.id)
            continue

        if spec.kind == "categorical_attribute":
            label: object = attr_label_text(trace.trace_attrs[spec.attribute])  # type: ignore[index]
        elif spec.kind == "next_activity":
            k = inst.real_length
            label = trace.events[k].activity if k < len(trace.events) else END_CLASS
        elif spec.kind == "duration_binary":
            label = POSITIVE_LABEL if trace.duration_seconds <= threshold else NEGATIVE_LABEL
        elif spec.kind == "numeric_attribute_binary":
            value = _numeric_attr(trace.trace_attrs, spec.attribute, f"trace {trace.id!r}")  # type: ignore[arg-type]
            label = POSITIVE_LABEL if value <= threshold else NEGATIVE_LABEL
        elif spec.kind == "remaining_time":
            label = (trace.events[-1].timestamp - inst.events[-1].timestamp).total_seconds()
        elif spec.kind == "duration_value":
            label = trace.duration_seconds
        else:  # numeric_attribute_value
            label = _numeric_attr(trace.trace_attrs, spec.attribute, f"trace {trace.id!r}")  # type: ignore[arg-type]
        out.append(LabeledInstance(instance=inst, label=label))

    if missing_attr:
        raise ValidationError(
            f"attribute {spec.attribute!r} missing on {len(missing_attr)} trace(s): "
            f"{sorted(set(missing_attr))}"
        )
    return out
