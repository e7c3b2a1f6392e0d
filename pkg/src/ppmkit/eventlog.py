"""XES event log model: parsing, canonical serialization, and profiling.

The XML subset understood here covers plain ``log``/``trace``/``event``
elements with flat ``string``/``int``/``float``/``boolean``/``date``
attribute children keyed by ``key``/``value`` pairs.  Nested containers and
extension declarations are ignored.  Three attribute keys are normalized
into structure rather than kept as payload: ``concept:name`` (activity on
events, identifier on traces), ``time:timestamp``, and ``org:resource``.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property

from .errors import ParseError, ValidationError
from .util import sha256_hex

ATTR_KINDS = ("string", "integer", "real", "boolean", "timestamp")

# XES element tag per attribute kind, and back.
_KIND_TO_TAG = {
    "string": "string",
    "integer": "int",
    "real": "float",
    "boolean": "boolean",
    "timestamp": "date",
}
_TAG_TO_KIND = {v: k for k, v in _KIND_TO_TAG.items()}

_ACTIVITY_KEY = "concept:name"
_TIMESTAMP_KEY = "time:timestamp"
_RESOURCE_KEY = "org:resource"


@dataclass(frozen=True)
class AttributeValue:
    """A typed XES attribute value.

    ``kind`` is one of :data:`ATTR_KINDS`; ``value`` holds the parsed Python
    value (str, int, float, bool, or an aware datetime).
    """

    kind: str
    value: object

    def __post_init__(self):
        if self.kind not in ATTR_KINDS:
            raise ValidationError(f"unknown attribute kind {self.kind!r}")
        if self.kind == "timestamp":
            if not isinstance(self.value, datetime) or self.value.tzinfo is None:
                raise ValidationError("timestamp attributes must be timezone-aware datetimes")

    def as_text(self) -> str:
        """Canonical string form, stable across parse/format round trips."""
        return format_attribute_text(self.kind, self.value)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ParseError(f"bad timestamp {text!r}: {exc}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def format_attribute_text(kind: str, value: object) -> str:
    if kind == "boolean":
        return "true" if value else "false"
    if kind == "timestamp":
        return value.isoformat()  # type: ignore[union-attr]
    if kind == "real":
        return repr(float(value))  # type: ignore[arg-type]
    return str(value)


def parse_attribute_text(kind: str, text: str) -> AttributeValue:
    try:
        if kind == "string":
            return AttributeValue("string", text)
        if kind == "integer":
            return AttributeValue("integer", int(text))
        if kind == "real":
            return AttributeValue("real", float(text))
        if kind == "boolean":
            lowered = text.strip().lower()
            if lowered not in ("true", "false"):
                raise ValueError(f"not a boolean: {text!r}")
            return AttributeValue("boolean", lowered == "true")
        if kind == "timestamp":
            return AttributeValue("timestamp", parse_timestamp(text))
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"bad {kind} attribute value {text!r}: {exc}") from None
    raise ParseError(f"unknown attribute kind {kind!r}")


@dataclass(frozen=True)
class Event:
    """One event: activity class, aware timestamp, optional resource, payload."""

    activity: str
    timestamp: datetime
    resource: str | None = None
    payload: dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        if not self.activity:
            raise ValidationError("event activity must be non-empty")
        if self.timestamp.tzinfo is None:
            raise ValidationError("event timestamp must be timezone-aware")


@dataclass(frozen=True)
class Trace:
    """One case: ordered events plus case-level attributes.

    Events must be in non-decreasing timestamp order and at least one event
    must be present; downstream prefix and duration semantics rely on both.
    """

    id: str
    events: tuple[Event, ...]
    trace_attrs: dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValidationError("trace id must be non-empty")
        if not self.events:
            raise ValidationError(f"trace {self.id!r} has no events")
        for prev, cur in zip(self.events, self.events[1:]):
            if cur.timestamp < prev.timestamp:
                raise ValidationError(f"trace {self.id!r} events are not time-ordered")

    @property
    def duration_seconds(self) -> float:
        return (self.events[-1].timestamp - self.events[0].timestamp).total_seconds()

    @property
    def variant(self) -> tuple[str, ...]:
        return tuple(e.activity for e in self.events)


@dataclass(frozen=True)
class EventLog:
    """An immutable collection of traces with unique ids.

    ``log.id`` is a content digest of the canonical serialized form, so two
    logs with identical content share an id regardless of origin.
    """

    name: str
    traces: tuple[Trace, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for trace in self.traces:
            if trace.id in seen:
                raise ValidationError(f"duplicate trace id {trace.id!r}")
            seen.add(trace.id)

    @cached_property
    def id(self) -> str:
        return sha256_hex(serialize_xes(self))

    @cached_property
    def _by_id(self) -> dict[str, Trace]:
        return {t.id: t for t in self.traces}

    def trace(self, trace_id: str) -> Trace | None:
        return self._by_id.get(trace_id)

    @property
    def event_count(self) -> int:
        return sum(len(t.events) for t in self.traces)


def _local_tag(element: ET.Element) -> str:
    tag = element.tag
    return tag.rsplit("}", 1)[-1] if "}" in tag else tag


def _parse_attr_elements(element: ET.Element, context: str) -> dict[str, AttributeValue]:
    attrs: dict[str, AttributeValue] = {}
    for child in element:
        tag = _local_tag(child)
        kind = _TAG_TO_KIND.get(tag)
        if kind is None:
            continue  # outside the supported subset: skip silently
        key = child.get("key")
        value = child.get("value")
        if key is None or value is None:
            raise ParseError(f"{context}: <{tag}> element missing key or value")
        attrs[key] = parse_attribute_text(kind, value)
    return attrs


def parse_xes(data: bytes | str, default_name: str = "log") -> EventLog:
    """Parse an XES document into an :class:`EventLog`.

    Events inside a trace are sorted by timestamp (stable, so file order
    breaks ties).  Traces without a ``concept:name`` get positional ids.
    Traces without events are rejected: every downstream operation (prefixes,
    durations, orderings) needs at least one timestamp per case.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ParseError(f"not well-formed XML at line {line}, column {column}") from None
    if _local_tag(root) != "log":
        raise ParseError(f"root element is <{_local_tag(root)}>, expected <log>")

    log_attrs = _parse_attr_elements(root, "log")
    name_attr = log_attrs.get(_ACTIVITY_KEY)
    name = str(name_attr.value) if name_attr is not None else default_name

    traces: list[Trace] = []
    for index, trace_el in enumerate(el for el in root if _local_tag(el) == "trace"):
        trace_attrs = _parse_attr_elements(trace_el, f"trace #{index}")
        id_attr = trace_attrs.pop(_ACTIVITY_KEY, None)
        trace_id = str(id_attr.value) if id_attr is not None else f"trace_{index}"

        events: list[Event] = []
        for ev_index, event_el in enumerate(el for el in trace_el if _local_tag(el) == "event"):
            ev_attrs = _parse_attr_elements(event_el, f"trace {trace_id!r} event #{ev_index}")
            activity_attr = ev_attrs.pop(_ACTIVITY_KEY, None)
            if activity_attr is None:
                raise ParseError(f"trace {trace_id!r} event #{ev_index} has no {_ACTIVITY_KEY}")
            ts_attr = ev_attrs.pop(_TIMESTAMP_KEY, None)
            if ts_attr is None:
                raise ParseError(f"trace {trace_id!r} event #{ev_index} has no {_TIMESTAMP_KEY}")
            if ts_attr.kind != "timestamp":
                raise ParseError(f"trace {trace_id!r} event #{ev_index}: {_TIMESTAMP_KEY} is not a date")
            resource_attr = ev_attrs.pop(_RESOURCE_KEY, None)
            resource = str(resource_attr.value) if resource_attr is not None else None
            events.append(
                Event(
                    activity=str(activity_attr.value),
                    timestamp=ts_attr.value,  # type: ignore[arg-type]
                    resource=resource,
                    payload=ev_attrs,
                )
            )
        if not events:
            raise ValidationError(f"trace {trace_id!r} has no events")
        events.sort(key=lambda e: e.timestamp)
        traces.append(Trace(id=trace_id, events=tuple(events), trace_attrs=trace_attrs))

    return EventLog(name=name, traces=tuple(traces))


def _append_attr(parent: ET.Element, key: str, attr: AttributeValue) -> None:
    ET.SubElement(parent, _KIND_TO_TAG[attr.kind], {"key": key, "value": attr.as_text()})


def serialize_xes(log: EventLog) -> bytes:
    """Serialize to canonical XES bytes.

    Canonical means: fixed element order (normalized attributes first, then
    payload sorted by key), fixed formatting, UTF-8.  Equal logs serialize to
    equal bytes, which is what content digests are computed over.
    """
    root = ET.Element("log", {"xes.version": "1849-2016", "xes.features": ""})
    _append_attr(root, _ACTIVITY_KEY, AttributeValue("string", log.name))
    for trace in log.traces:
        trace_el = ET.SubElement(root, "trace")
        _append_attr(trace_el, _ACTIVITY_KEY, AttributeValue("string", trace.id))
        for key in sorted(trace.trace_attrs):
            _append_attr(trace_el, key, trace.trace_attrs[key])
        for event in trace.events:
            event_el = ET.SubElement(trace_el, "event")
            _append_attr(event_el, _ACTIVITY_KEY, AttributeValue("string", event.activity))
            _append_attr(event_el, _TIMESTAMP_KEY, AttributeValue("timestamp", event.timestamp))
            if event.resource is not None:
                _append_attr(event_el, _RESOURCE_KEY, AttributeValue("string", event.resource))
            for key in sorted(event.payload):
                _append_attr(event_el, key, event.payload[key])
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


@dataclass(frozen=True)
class AttributeProfile:
    name: str
    scope: str  # "trace" | "event"
    kind: str
    distinct_count: int
    fill_rate: float


@dataclass(frozen=True)
class LogStats:
    """Descriptive profile of a log; see :func:`compute_stats`."""

    trace_count: int
    event_count: int
    event_classes: tuple[str, ...]
    trace_length_min: int
    trace_length_mean: float
    trace_length_max: int
    span_start: datetime
    span_end: datetime
    attributes: tuple[AttributeProfile, ...]
    parallelism: float
    resource_contention: float
    attribute_sparsity: float

    def to_dict(self) -> dict:
        return {
            "trace_count": self.trace_count,
            "event_count": self.event_count,
            "event_classes": list(self.event_classes),
            "trace_length": {
                "min": self.trace_length_min,
                "mean": self.trace_length_mean,
                "max": self.trace_length_max,
            },
            "span": {"start": self.span_start.isoformat(), "end": self.span_end.isoformat()},
            "attributes": [
                {
                    "name": p.name,
                    "scope": p.scope,
                    "kind": p.kind,
                    "distinct_count": p.distinct_count,
                    "fill_rate": p.fill_rate,
                }
                for p in self.attributes
            ],
            "parallelism": self.parallelism,
            "resource_contention": self.resource_contention,
            "attribute_sparsity": self.attribute_sparsity,
        }


def _sweep_mean_open(intervals: list[tuple[datetime, datetime]]) -> float:
    """Time-weighted mean number of open intervals over the active timespan.

    Active timespan is the union of the intervals, so stretches where
    nothing is open do not dilute the mean.  When every interval has zero
    width the time-weighted form is undefined; fall back to the mean open
    count over the distinct instants instead.
    """
    deltas: list[tuple[datetime, int]] = []
    for start, end in intervals:
        deltas.append((start, 1))
        deltas.append((end, -1))
    deltas.sort(key=lambda pair: (pair[0], -pair[1]))

    weighted = 0.0
    active = 0.0
    open_count = 0
    prev: datetime | None = None
    for instant, delta in deltas:
        if prev is not None and open_count > 0:
            span = (instant - prev).total_seconds()
            weighted += open_count * span
            active += span
        open_count += delta
        prev = instant
    if active > 0:
        return weighted / active

    instants = sorted({t for pair in intervals for t in pair})
    counts = [sum(1 for s, e in intervals if s <= p <= e) for p in instants]
    return sum(counts) / len(counts)


def compute_stats(log: EventLog) -> LogStats:
    """Profile a log: sizes, span, attribute inventory, and three shape scores.

    parallelism
        Time-weighted mean count of concurrently open cases across the union
        of case lifespans; >= 1 for any non-empty log.
    resource_contention
        Same sweep applied per resource to the [first, last] span of each
        case's events on that resource, averaged across resources; 0.0 when
        no event carries a resource.
    attribute_sparsity
        Missing attribute cells over total cells, where cells are the cross
        product of traces x distinct trace-attribute names plus events x
        distinct event-attribute names (``org:resource`` included when any
        event has one); 0.0 when the log declares no attributes.
    """
    if not log.traces:
        raise ValidationError("cannot profile an empty log")

    lengths = [len(t.events) for t in log.traces]
    event_classes = sorted({e.activity for t in log.traces for e in t.events})
    span_start = min(t.events[0].timestamp for t in log.traces)
    span_end = max(t.events[-1].timestamp for t in log.traces)

    parallelism = _sweep_mean_open(
        [(t.events[0].timestamp, t.events[-1].timestamp) for t in log.traces]
    )

    per_resource: dict[str, list[tuple[datetime, datetime]]] = {}
    any_resource = False
    for trace in log.traces:
        spans: dict[str, tuple[datetime, datetime]] = {}
        for event in trace.events:
            if event.resource is None:
                continue
            any_resource = True
            lo, hi = spans.get(event.resource, (event.timestamp, event.timestamp))
            spans[event.resource] = (min(lo, event.timestamp), max(hi, event.timestamp))
        for resource, interval in spans.items():
            per_resource.setdefault(resource, []).append(interval)
    if per_resource:
        contention = sum(_sweep_mean_open(v) for v in per_resource.values()) / len(per_resource)
    else:
        contention = 0.0

    trace_attr_names: set[str] = set()
    event_attr_names: set[str] = set()
    for trace in log.traces:
        trace_attr_names.update(trace.trace_attrs)
        for event in trace.events:
            event_attr_names.update(event.payload)
    if any_resource:
        event_attr_names.add(_RESOURCE_KEY)

    profiles: list[AttributeProfile] = []
    missing_cells = 0
    total_cells = 0

    for name in sorted(trace_attr_names):
        present = [t.trace_attrs[name] for t in log.traces if name in t.trace_attrs]
        profiles.append(
            AttributeProfile(
                name=name,
                scope="trace",
                kind=present[0].kind,
                distinct_count=len({v.as_text() for v in present}),
                fill_rate=len(present) / len(log.traces),
            )
        )
        missing_cells += len(log.traces) - len(present)
        total_cells += len(log.traces)

    n_events = log.event_count
    for name in sorted(event_attr_names):
        if name == _RESOURCE_KEY:
            present_texts = [e.resource for t in log.traces for e in t.events if e.resource is not None]
            kind = "string"
        else:
            present_values = [
                e.payload[name] for t in log.traces for e in t.events if name in e.payload
            ]
            present_texts = [v.as_text() for v in present_values]
            kind = present_values[0].kind
        profiles.append(
            AttributeProfile(
                name=name,
                scope="event",
                kind=kind,
                distinct_count=len(set(present_texts)),
                fill_rate=len(present_texts) / n_events,
            )
        )
        missing_cells += n_events - len(present_texts)
        total_cells += n_events

    sparsity = missing_cells / total_cells if total_cells else 0.0

    return LogStats(
        trace_count=len(log.traces),
        event_count=n_events,
        event_classes=tuple(event_classes),
        trace_length_min=min(lengths),
        trace_length_mean=sum(lengths) / len(lengths),
        trace_length_max=max(lengths),
        span_start=span_start,
        span_end=span_end,
        attributes=tuple(profiles),
        parallelism=parallelism,
        resource_contention=contention,
        attribute_sparsity=sparsity,
    )
