"""Trace ordering, filtering, train/test splitting, and prefix extraction.

A split is identified by a ``split_key``: a digest of the source log id,
the split name, the train fraction, and the ordering.  Everything trained
on a split inherits that key, which is what makes downstream caching sound.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import ValidationError
from .eventlog import EventLog, Trace
from .util import SplitMix64, ceil_exact, digest_of

ORDERING_KINDS = ("temporal_start", "temporal_end", "random", "as_is")


@dataclass(frozen=True)
class Ordering:
    kind: str = "temporal_start"
    seed: int = 0  # only meaningful for kind="random"

    def __post_init__(self):
        if self.kind not in ORDERING_KINDS:
            raise ValidationError(f"unknown ordering kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}

    @staticmethod
    def from_dict(data: dict) -> "Ordering":
        return Ordering(kind=data.get("kind", "temporal_start"), seed=int(data.get("seed", 0)))


def order_traces(log: EventLog, ordering: Ordering) -> EventLog:
    """Return a new log with traces reordered; sorts are stable."""
    traces = list(log.traces)
    if ordering.kind == "temporal_start":
        traces.sort(key=lambda t: t.events[0].timestamp)
    elif ordering.kind == "temporal_end":
        traces.sort(key=lambda t: t.events[-1].timestamp)
    elif ordering.kind == "random":
        SplitMix64(ordering.seed).shuffle(traces)
    return EventLog(name=log.name, traces=tuple(traces))


# --- trace filters -----------------------------------------------------------

_PREDICATE_OPS = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class AttributePredicate:
    """Keep traces whose attribute satisfies ``value <op> reference``.

    Traces lacking the attribute fail the predicate.  Ordered comparisons
    against non-numeric attributes compare canonical strings.
    """

    name: str
    op: str
    reference: object

    def __post_init__(self):
        if self.op not in _PREDICATE_OPS:
            raise ValidationError(f"unknown predicate op {self.op!r}")

    def matches(self, trace: Trace) -> bool:
        attr = trace.trace_attrs.get(self.name)
        if attr is None:
            return False
        compare = _PREDICATE_OPS[self.op]
        value = attr.value
        if isinstance(value, bool):
            value = attr.as_text()
        if isinstance(value, (int, float)) and isinstance(self.reference, (int, float)):
            return compare(float(value), float(self.reference))
        return compare(attr.as_text(), str(self.reference))


@dataclass(frozen=True)
class LengthBounds:
    """Keep traces with min_events <= len <= max_events (None = unbounded)."""

    min_events: int | None = None
    max_events: int | None = None

    def matches(self, trace: Trace) -> bool:
        n = len(trace.events)
        if self.min_events is not None and n < self.min_events:
            return False
        if self.max_events is not None and n > self.max_events:
            return False
        return True


@dataclass(frozen=True)
class VariantFrequency:
    """Keep traces whose activity sequence occurs at least min_count times."""

    min_count: int = 2

    def matches(self, trace: Trace) -> bool:  # needs log context; see filter_traces
        raise NotImplementedError


def filter_from_dict(data: dict):
    """Build a filter rule from its wire form (used by the API and CLI)."""
    kind = data.get("type")
    if kind == "attribute":
        return AttributePredicate(
            name=data["name"], op=data["op"], reference=data["value"]
        )
    if kind == "length":
        return LengthBounds(
            min_events=data.get("min_events"), max_events=data.get("max_events")
        )
    if kind == "variant":
        return VariantFrequency(min_count=int(data.get("min_count", 2)))
    raise ValidationError(f"unknown filter type {kind!r}")


def filter_traces(log: EventLog, rules: list) -> EventLog:
    """Apply the conjunction of filter rules; returns a new log.

    Attribute predicates over a name that no trace in the log carries are
    rejected: that is almost always a typo, not an intent to drop everything.
    """
    for rule in rules:
        if isinstance(rule, AttributePredicate):
            if not any(rule.name in t.trace_attrs for t in log.traces):
                raise ValidationError(f"no trace has attribute {rule.name!r}")

    variant_counts: Counter | None = None
    if any(isinstance(r, VariantFrequency) for r in rules):
        variant_counts = Counter(t.variant for t in log.traces)

    kept = []
    for trace in log.traces:
        ok = True
        for rule in rules:
            if isinstance(rule, VariantFrequency):
                ok = variant_counts[trace.variant] >= rule.min_count  # type: ignore[index]
            else:
                ok = rule.matches(trace)
            if not ok:
                break
        if ok:
            kept.append(trace)
    return EventLog(name=log.name, traces=tuple(kept))


# --- splitting ---------------------------------------------------------------


_ceil_exact = ceil_exact


@dataclass(frozen=True)
class SplitSpec:
    log_ref: str
    name: str
    train_fraction: float
    ordering: Ordering = field(default_factory=Ordering)

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must be strictly between 0 and 1")
        if not self.name:
            raise ValidationError("split name must be non-empty")

    @property
    def split_key(self) -> str:
        return digest_of(
            {
                "log_ref": self.log_ref,
                "name": self.name,
                "train_fraction": repr(self.train_fraction),
                "ordering": self.ordering.to_dict(),
            }
        )

    def to_dict(self) -> dict:
        return {
            "log_ref": self.log_ref,
            "name": self.name,
            "train_fraction": self.train_fraction,
            "ordering": self.ordering.to_dict(),
        }

    @staticmethod
    def from_dict(data: dict) -> "SplitSpec":
        return SplitSpec(
            log_ref=data["log_ref"],
            name=data["name"],
            train_fraction=float(data["train_fraction"]),
            ordering=Ordering.from_dict(data.get("ordering", {})),
        )


@dataclass(frozen=True)
class SplitResult:
    spec: SplitSpec
    train: EventLog
    test: EventLog


def split_log(log: EventLog, spec: SplitSpec) -> SplitResult:
    """Order the log per the spec, then cut the first ceil(fraction * N)
    traces as training and the rest as test.

    Both halves must be non-empty; a fraction that rounds every trace into
    one side is rejected rather than silently clamped.
    """
    n = len(log.traces)
    if n < 2:
        raise ValidationError(f"log has {n} trace(s); need at least 2 to split")
    ordered = order_traces(log, spec.ordering)
    n_train = _ceil_exact(spec.train_fraction * n)
    if n_train <= 0 or n_train >= n:
        raise ValidationError(
            f"degenerate split: fraction {spec.train_fraction} of {n} traces "
            f"puts {n_train} in training and {n - n_train} in test"
        )
    return SplitResult(
        spec=spec,
        train=EventLog(name=log.name, traces=ordered.traces[:n_train]),
        test=EventLog(name=log.name, traces=ordered.traces[n_train:]),
    )


# --- prefix extraction -------------------------------------------------------

PREFIX_MODES = ("fixed", "up_to", "per_length_up_to")
SHORT_TRACE_POLICIES = ("discard", "zero_pad")


@dataclass(frozen=True)
class PrefixSpec:
    """How to derive prefix instances from traces.

    fixed(n)
        One instance per trace: the first n events.
    up_to(n)
        Instances at every length 1..min(n, trace length).
    per_length_up_to(n)
        Same instances as up_to(n); downstream consumers group them by
        length and train one model per group.

    ``short_traces`` decides what happens to traces shorter than n under
    fixed (and, for the padded variant, whether an instance at the full
    target length is added): discard drops them, zero_pad keeps them with
    the missing positions marked as padding.
    """

    mode: str = "fixed"
    length: int = 1
    short_traces: str = "discard"

    def __post_init__(self):
        if self.mode not in PREFIX_MODES:
            raise ValidationError(f"unknown prefix mode {self.mode!r}")
        if self.short_traces not in SHORT_TRACE_POLICIES:
            raise ValidationError(f"unknown short-trace policy {self.short_traces!r}")
        if self.length < 1:
            raise ValidationError("prefix length must be >= 1")

    def to_dict(self) -> dict:
        return {"mode": self.mode, "length": self.length, "short_traces": self.short_traces}

    @staticmethod
    def from_dict(data: dict) -> "PrefixSpec":
        return PrefixSpec(
            mode=data.get("mode", "fixed"),
            length=int(data.get("length", 1)),
            short_traces=data.get("short_traces", "discard"),
        )


@dataclass(frozen=True)
class PrefixInstance:
    """A prefix of one trace.

    ``prefix_length`` counts slots, not events: a padded instance has fewer
    real events than slots.  ``events`` holds only the real events.
    """

    trace_id: str
    prefix_length: int
    events: tuple
    trace_attrs: dict
    source_trace_length: int

    @property
    def real_length(self) -> int:
        return len(self.events)

    @property
    def is_padded(self) -> bool:
        return self.real_length < self.prefix_length


def _instance(trace: Trace, n_events: int, slots: int) -> PrefixInstance:
    return PrefixInstance(
        trace_id=trace.id,
        prefix_length=slots,
        events=trace.events[:n_events],
        trace_attrs=trace.trace_attrs,
        source_trace_length=len(trace.events),
    )


def extract_prefixes(log: EventLog, spec: PrefixSpec) -> list[PrefixInstance]:
    """Expand a log into prefix instances per the spec; see PrefixSpec."""
    out: list[PrefixInstance] = []
    pad = spec.short_traces == "zero_pad"
    for trace in log.traces:
        n = len(trace.events)
        if spec.mode == "fixed":
            if n >= spec.length:
                out.append(_instance(trace, spec.length, spec.length))
            elif pad:
                out.append(_instance(trace, n, spec.length))
        else:  # up_to and per_length_up_to share the instance set
            for k in range(1, min(spec.length, n) + 1):
                out.append(_instance(trace, k, k))
            if pad and n < spec.length:
                out.append(_instance(trace, n, spec.length))
    return out
