"""Feature encoding: prefix instances -> numeric matrices.

Three methods:

boolean
    One column per activity class seen in training, set to 1.0 when the
    activity occurs anywhere in the prefix.  Order-insensitive.

simple_index
    ``padded_length`` columns ``pos_1..pos_L``; cell i holds the vocabulary
    index of the i-th activity.  Index 0 is reserved for padding; activities
    unseen in training map to a dedicated UNKNOWN index (the last one).

complex_index
    The simple_index columns, then for each position a block per event
    attribute discovered in training (categorical -> one-hot over training
    levels, numeric -> value plus a presence flag), then trace attributes
    (categorical -> one-hot, numeric -> single column).  ``org:resource``
    participates as a categorical event attribute when training events
    carry resources.  Timestamp-kind payload attributes are treated as
    numeric (epoch seconds).

Column layout, vocabularies, categorical levels, and attribute kinds are
all frozen at fit time from the training instances alone; encoding never
mutates a fitted encoder, so one encoder can serve concurrent encodes.

Unseen categorical values at encode time produce all-zero one-hot blocks;
missing numeric event attributes produce (0.0, flag=0.0); missing numeric
trace attributes produce 0.0.  Prefixes longer than ``padded_length`` are
truncated to the first ``padded_length`` events.

With ``intercase=True`` two columns are appended by
:func:`augment_intercase`: ``open_cases`` (other traces active at the
prefix end) and ``recent_event_rate`` (events of other traces in the
trailing hour).  These need a reference log, so they are computed in a
separate pass rather than at fit time.
"""
from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .eventlog import AttributeValue, Event, EventLog
from .labeling import LabeledInstance
from .splitting import PrefixInstance
from .util import digest_of

ENCODING_METHODS = ("boolean", "simple_index", "complex_index")

PAD_INDEX = 0.0
UNKNOWN_TEXT = "\x00unknown"
_RESOURCE_ATTR = "org:resource"

INTERCASE_COLUMNS = ("open_cases", "recent_event_rate")
INTERCASE_WINDOW_SECONDS = 3600.0


@dataclass(frozen=True)
class EncodingSpec:
    method: str = "boolean"
    padded_length: int = 1
    intercase: bool = False

    def __post_init__(self):
        if self.method not in ENCODING_METHODS:
            raise ValidationError(f"unknown encoding method {self.method!r}")
        if self.padded_length < 1:
            raise ValidationError("padded_length must be >= 1")

    def to_dict(self) -> dict:
        return {"method": self.method, "padded_length": self.padded_length, "intercase": self.intercase}

    @staticmethod
    def from_dict(data: dict) -> "EncodingSpec":
        return EncodingSpec(
            method=data.get("method", "boolean"),
            padded_length=int(data.get("padded_length", 1)),
            intercase=bool(data.get("intercase", False)),
        )


def _attr_text(attr: AttributeValue) -> str:
    return attr.as_text()


def _attr_numeric(attr: AttributeValue) -> float:
    if attr.kind == "timestamp":
        return attr.value.timestamp()  # type: ignore[union-attr]
    return float(attr.value)  # type: ignore[arg-type]


def _event_attr_value(event: Event, name: str) -> AttributeValue | None:
    if name == _RESOURCE_ATTR:
        if event.resource is None:
            return None
        return AttributeValue("string", event.resource)
    return event.payload.get(name)


@dataclass(frozen=True)
class FeatureMatrix:
    """A dense numeric matrix with named columns and carried-through labels.

    ``row_meta`` pairs each row with (trace_id, prefix_length) so results
    can be grouped by prefix length and joined back to traces.
    """

    feature_names: tuple[str, ...]
    rows: np.ndarray
    labels: tuple
    row_meta: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if self.rows.ndim != 2:
            raise ValidationError("rows must be a 2-d array")
        if self.rows.shape[1] != len(self.feature_names):
            raise ValidationError("row width does not match feature names")
        if len(self.labels) != self.rows.shape[0] or len(self.row_meta) != self.rows.shape[0]:
            raise ValidationError("labels and row_meta must align with rows")

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def take(self, indices) -> "FeatureMatrix":
        idx = list(indices)
        return FeatureMatrix(
            feature_names=self.feature_names,
            rows=self.rows[idx],
            labels=tuple(self.labels[i] for i in idx),
            row_meta=tuple(self.row_meta[i] for i in idx),
        )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(list(self.feature_names) + ["label"])
        for row, label in zip(self.rows, self.labels):
            writer.writerow([repr(float(v)) for v in row] + [label if isinstance(label, str) else repr(label)])
        return out.getvalue()


@dataclass(frozen=True)
class FittedEncoder:
    """Frozen encoding schema learned from training instances."""

    spec: EncodingSpec
    activity_vocab: dict[str, int]  # activity -> index >= 1; 0 = PAD, last = UNKNOWN
    event_cat_attrs: dict[str, tuple[str, ...]]  # name -> training levels
    event_num_attrs: tuple[str, ...]
    trace_cat_attrs: dict[str, tuple[str, ...]]
    trace_num_attrs: tuple[str, ...]
    feature_names: tuple[str, ...] = field(default=())

    @property
    def unknown_index(self) -> int:
        return len(self.activity_vocab) + 1

    @property
    def digest(self) -> str:
        return digest_of(
            {
                "spec": self.spec.to_dict(),
                "vocab": self.activity_vocab,
                "event_cat": {k: list(v) for k, v in self.event_cat_attrs.items()},
                "event_num": list(self.event_num_attrs),
                "trace_cat": {k: list(v) for k, v in self.trace_cat_attrs.items()},
                "trace_num": list(self.trace_num_attrs),
                "features": list(self.feature_names),
            }
        )


def _discover_schema(spec: EncodingSpec, instances: list[PrefixInstance]):
    # boolean is positionless and covers the whole prefix; index methods
    # only ever look at the padded window, so the vocabulary does too
    window = None if spec.method == "boolean" else spec.padded_length
    vocab: dict[str, int] = {}
    for inst in instances:
        for event in inst.events[:window]:
            if event.activity not in vocab:
                vocab[event.activity] = len(vocab) + 1

    event_cat: dict[str, list[str]] = {}
    event_num: list[str] = []
    trace_cat: dict[str, list[str]] = {}
    trace_num: list[str] = []
    if spec.method == "complex_index":
        event_kinds: dict[str, str] = {}
        for inst in instances:
            for event in inst.events[: spec.padded_length]:
                names = list(event.payload)
                if event.resource is not None:
                    names.append(_RESOURCE_ATTR)
                for name in names:
                    attr = _event_attr_value(event, name)
                    assert attr is not None
                    kind = event_kinds.setdefault(name, attr.kind)
                    if kind in ("string", "boolean"):
                        levels = event_cat.setdefault(name, [])
                        text = _attr_text(attr)
                        if attr.kind in ("string", "boolean") and text not in levels:
                            levels.append(text)
                    else:
                        if name not in event_num:
                            event_num.append(name)

        trace_kinds: dict[str, str] = {}
        for inst in instances:
            for name, attr in inst.trace_attrs.items():
                kind = trace_kinds.setdefault(name, attr.kind)
                if kind in ("string", "boolean"):
                    levels = trace_cat.setdefault(name, [])
                    text = _attr_text(attr)
                    if attr.kind in ("string", "boolean") and text not in levels:
                        levels.append(text)
                else:
                    if name not in trace_num:
                        trace_num.append(name)

    return (
        vocab,
        {k: tuple(v) for k, v in event_cat.items()},
        tuple(event_num),
        {k: tuple(v) for k, v in trace_cat.items()},
        tuple(trace_num),
    )


def _build_feature_names(
    spec: EncodingSpec,
    vocab: dict[str, int],
    event_cat: dict[str, tuple[str, ...]],
    event_num: tuple[str, ...],
    trace_cat: dict[str, tuple[str, ...]],
    trace_num: tuple[str, ...],
) -> tuple[str, ...]:
    if spec.method == "boolean":
        return tuple(vocab)
    names = [f"pos_{i}" for i in range(1, spec.padded_length + 1)]
    if spec.method == "simple_index":
        return tuple(names)
    for i in range(1, spec.padded_length + 1):
        for attr in event_cat:
            names.extend(f"{attr}@pos_{i}={level}" for level in event_cat[attr])
        for attr in event_num:
            names.append(f"{attr}@pos_{i}")
            names.append(f"{attr}@pos_{i}:present")
    for attr in trace_cat:
        names.extend(f"trace:{attr}={level}" for level in trace_cat[attr])
    for attr in trace_num:
        names.append(f"trace:{attr}")
    return tuple(names)


def fit_encoder(spec: EncodingSpec, training: list[LabeledInstance]) -> FittedEncoder:
    """Learn the schema (vocabulary, attribute inventory, column layout)
    from training instances only."""
    if not training:
        raise ValidationError("cannot fit an encoder on zero instances")
    instances = [li.instance for li in training]
    vocab, event_cat, event_num, trace_cat, trace_num = _discover_schema(spec, instances)
    if not vocab:
        raise ValidationError("training instances contain no events within the padded length")
    names = _build_feature_names(spec, vocab, event_cat, event_num, trace_cat, trace_num)
    return FittedEncoder(
        spec=spec,
        activity_vocab=vocab,
        event_cat_attrs=event_cat,
        event_num_attrs=event_num,
        trace_cat_attrs=trace_cat,
        trace_num_attrs=trace_num,
        feature_names=names,
    )


def _encode_one(enc: FittedEncoder, inst: PrefixInstance, row: np.ndarray) -> None:
    spec = enc.spec
    if spec.method == "boolean":
        for event in inst.events:
            idx = enc.activity_vocab.get(event.activity)
            if idx is not None:
                row[idx - 1] = 1.0
        return
    events = inst.events[: spec.padded_length]

    unknown = float(enc.unknown_index)
    for i, event in enumerate(events):
        row[i] = float(enc.activity_vocab.get(event.activity, unknown))
    # remaining positions stay PAD_INDEX (0.0)
    if spec.method == "simple_index":
        return

    col = spec.padded_length
    for i in range(spec.padded_length):
        event = events[i] if i < len(events) else None
        for attr, levels in enc.event_cat_attrs.items():
            if event is not None:
                value = _event_attr_value(event, attr)
                if value is not None:
                    text = _attr_text(value)
                    for j, level in enumerate(levels):
                        if text == level:
                            row[col + j] = 1.0
                            break
            col += len(levels)
        for attr in enc.event_num_attrs:
            if event is not None:
                value = _event_attr_value(event, attr)
                if value is not None and value.kind != "string" and value.kind != "boolean":
                    row[col] = _attr_numeric(value)
                    row[col + 1] = 1.0
            col += 2
    for attr, levels in enc.trace_cat_attrs.items():
        value = inst.trace_attrs.get(attr)
        if value is not None:
            text = _attr_text(value)
            for j, level in enumerate(levels):
                if text == level:
                    row[col + j] = 1.0
                    break
        col += len(levels)
    for attr in enc.trace_num_attrs:
        value = inst.trace_attrs.get(attr)
        if value is not None and value.kind in ("integer", "real", "timestamp"):
            row[col] = _attr_numeric(value)
        col += 1


def encode_instances(enc: FittedEncoder, labeled: list[LabeledInstance]) -> FeatureMatrix:
    """Encode labeled instances against a fitted schema.

    Pure with respect to the encoder: unseen activities and categorical
    values never extend the schema.
    """
    rows = np.zeros((len(labeled), len(enc.feature_names)), dtype=np.float64)
    for i, li in enumerate(labeled):
        _encode_one(enc, li.instance, rows[i])
    return FeatureMatrix(
        feature_names=enc.feature_names,
        rows=rows,
        labels=tuple(li.label for li in labeled),
        row_meta=tuple((li.instance.trace_id, li.instance.prefix_length) for li in labeled),
    )


def _prefix_end(inst: PrefixInstance):
    if not inst.events:
        raise ValidationError(f"instance of trace {inst.trace_id!r} has no events")
    return inst.events[-1].timestamp


def augment_intercase(matrix: FeatureMatrix, log: EventLog) -> FeatureMatrix:
    """Append the two intercase columns; see the module docstring.

    ``log`` is the part the instances came from (training rows against the
    training log, test rows against the test log), so the workload context
    reflects what was actually concurrent in that part.
    """
    for name in INTERCASE_COLUMNS:
        if name in matrix.feature_names:
            raise ValidationError(f"matrix already carries intercase column {name!r}")

    spans: dict[str, tuple[float, float]] = {}
    events_by_trace: dict[str, list[float]] = {}
    for trace in log.traces:
        stamps = [e.timestamp.timestamp() for e in trace.events]
        spans[trace.id] = (stamps[0], stamps[-1])
        events_by_trace[trace.id] = stamps
    starts = sorted(s for s, _ in spans.values())
    ends = sorted(e for _, e in spans.values())
    all_events = sorted(t for stamps in events_by_trace.values() for t in stamps)

    extra = np.zeros((len(matrix), 2), dtype=np.float64)
    for i, (trace_id, prefix_length) in enumerate(matrix.row_meta):
        trace = log.trace(trace_id)
        if trace is None:
            raise ValidationError(f"trace {trace_id!r} not present in the reference log")
        k = min(prefix_length, len(trace.events))
        at = trace.events[k - 1].timestamp.timestamp()

        open_cases = bisect.bisect_right(starts, at) - bisect.bisect_left(ends, at)
        span = spans[trace_id]
        if span[0] <= at <= span[1]:
            open_cases -= 1  # exclude the instance's own trace

        lo, hi = at - INTERCASE_WINDOW_SECONDS, at
        recent = bisect.bisect_right(all_events, hi) - bisect.bisect_right(all_events, lo)
        own = events_by_trace[trace_id]
        recent -= bisect.bisect_right(own, hi) - bisect.bisect_right(own, lo)

        extra[i, 0] = float(open_cases)
        extra[i, 1] = float(recent)

    return FeatureMatrix(
        feature_names=matrix.feature_names + INTERCASE_COLUMNS,
        rows=np.hstack([matrix.rows, extra]),
        labels=matrix.labels,
        row_meta=matrix.row_meta,
    )


def encode_with_spec(
    enc: FittedEncoder, labeled: list[LabeledInstance], log: EventLog | None = None
) -> FeatureMatrix:
    """Encode and, when the spec asks for it, append intercase columns."""
    matrix = encode_instances(enc, labeled)
    if enc.spec.intercase:
        if log is None:
            raise ValidationError("intercase encoding needs the reference log")
        matrix = augment_intercase(matrix, log)
    return matrix


# --- raw value lookups (used by explanations) --------------------------------


def raw_feature_value(enc: FittedEncoder, inst: PrefixInstance, feature_name: str) -> str:
    """The raw (pre-encoding) value behind a feature column for an instance.

    Returns canonical attribute text, "PAD" for positions beyond the real
    prefix, and "absent" for attributes the instance does not carry.
    """
    spec = enc.spec
    if spec.method == "boolean":
        if feature_name in enc.activity_vocab:
            present = any(e.activity == feature_name for e in inst.events)
            return "present" if present else "absent"
        raise ValidationError(f"unknown feature {feature_name!r}")

    if feature_name in INTERCASE_COLUMNS:
        raise ValidationError(f"{feature_name!r} is computed, not a raw attribute")

    if feature_name.startswith("pos_") and feature_name in enc.feature_names:
        position = int(feature_name[4:])
        if position <= len(inst.events):
            return inst.events[position - 1].activity
        return "PAD"

    if feature_name.startswith("trace:"):
        rest = feature_name[len("trace:") :]
        attr = rest.split("=", 1)[0]
        value = inst.trace_attrs.get(attr)
        return _attr_text(value) if value is not None else "absent"

    if "@pos_" in feature_name:
        attr, _, tail = feature_name.partition("@pos_")
        tail = tail.split("=", 1)[0].split(":", 1)[0]
        position = int(tail)
        if position > len(inst.events):
            return "PAD"
        value = _event_attr_value(inst.events[position - 1], attr)
        return _attr_text(value) if value is not None else "absent"

    raise ValidationError(f"unknown feature {feature_name!r}")


def raw_display(enc: FittedEncoder, inst: PrefixInstance) -> tuple[str, ...]:
    """Per-column "name=value" strings for presenting attributions."""
    out = []
    for name in enc.feature_names:
        if name in INTERCASE_COLUMNS:
            out.append(name)
        else:
            out.append(f"{name}={raw_feature_value(enc, inst, name)}")
    return tuple(out)
