"""Demo log generator with a planted, learnable outcome signal.

The second event of every trace is a triage step whose activity decides the
case outcome (with a small label-noise rate), so any encoder that sees
position 2 makes the outcome predictable while prefix-1 models stay near
chance.  Arrivals are staggered closely enough that cases overlap, giving
the workload features something to measure.
"""
from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import ValidationError
from .eventlog import AttributeValue, Event, EventLog, Trace

SIGNAL_POSITION = 2
FAST_TRIAGE = "triage_fast"
SLOW_TRIAGE = "triage_slow"
OUTCOME_ATTRIBUTE = "outcome"
POSITIVE_OUTCOME = "regular"
NEGATIVE_OUTCOME = "deviant"

_FIRST = "register"
_LAST = "archive"
_MIDDLE = ("review", "wait", "update", "escalate", "verify")
_CHANNELS = ("web", "phone", "office")
_REGIONS = ("north", "south", "east", "west")
_RESOURCES = tuple(f"r{i}" for i in range(1, 6))

_DEFAULT_START = datetime(2024, 1, 1, tzinfo=timezone.utc)


def generate_log(
    n_traces: int = 400,
    seed: int = 0,
    noise: float = 0.05,
    name: str = "synthetic",
    start: datetime = _DEFAULT_START,
) -> EventLog:
    """Deterministic log of ``n_traces`` cases, 10 to 15 events each."""
    if n_traces < 1:
        raise ValidationError("n_traces must be at least 1")
    if not 0.0 <= noise < 0.5:
        raise ValidationError("noise must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    traces = []
    for i in range(n_traces):
        fast = bool(rng.integers(0, 2))
        outcome = POSITIVE_OUTCOME if fast else NEGATIVE_OUTCOME
        if rng.random() < noise:
            outcome = NEGATIVE_OUTCOME if outcome == POSITIVE_OUTCOME else POSITIVE_OUTCOME

        length = int(rng.integers(10, 16))
        activities = [_FIRST, FAST_TRIAGE if fast else SLOW_TRIAGE]
        activities += [str(rng.choice(_MIDDLE)) for _ in range(length - 3)]
        activities.append(_LAST)

        # slow-triaged cases also run longer, so duration labels stay
        # correlated with the same planted signal
        base_gap = 10.0 if fast else 25.0
        arrival = start + timedelta(minutes=3.0 * i)
        at = arrival
        events = []
        for activity in activities:
            events.append(
                Event(
                    activity=activity,
                    timestamp=at,
                    resource=str(rng.choice(_RESOURCES)),
                    payload={"channel": AttributeValue("string", str(rng.choice(_CHANNELS)))},
                )
            )
            at = at + timedelta(minutes=base_gap * (0.5 + rng.random()))

        traces.append(
            Trace(
                id=f"case-{i:04d}",
                events=tuple(events),
                trace_attrs={
                    OUTCOME_ATTRIBUTE: AttributeValue("string", outcome),
                    "region": AttributeValue("string", str(rng.choice(_REGIONS))),
                    "amount": AttributeValue("real", float(np.round(rng.uniform(100.0, 10000.0), 2))),
                },
            )
        )
    return EventLog(name=name, traces=tuple(traces))
