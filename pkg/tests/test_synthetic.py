"""The demo generator must plant a signal that position-2 encoders can learn."""
import datetime as dt

import pytest

from ppmkit.errors import ValidationError
from ppmkit.eventlog import parse_xes, serialize_xes
from ppmkit.synthetic import (
    FAST_TRIAGE,
    NEGATIVE_OUTCOME,
    OUTCOME_ATTRIBUTE,
    POSITIVE_OUTCOME,
    SIGNAL_POSITION,
    SLOW_TRIAGE,
    generate_log,
)


def rule_accuracy(log):
    """Fraction of traces where the triage activity alone calls the outcome."""
    hits = 0
    for trace in log.traces:
        predicted = (
            POSITIVE_OUTCOME
            if trace.events[SIGNAL_POSITION - 1].activity == FAST_TRIAGE
            else NEGATIVE_OUTCOME
        )
        if trace.trace_attrs[OUTCOME_ATTRIBUTE].value == predicted:
            hits += 1
    return hits / len(log.traces)


class TestShape:
    def test_trace_count_and_lengths(self):
        log = generate_log(n_traces=60, seed=3)
        assert len(log.traces) == 60
        for trace in log.traces:
            assert 10 <= len(trace.events) <= 15
            assert trace.events[0].activity == "register"
            assert trace.events[-1].activity == "archive"
            assert trace.events[SIGNAL_POSITION - 1].activity in (FAST_TRIAGE, SLOW_TRIAGE)

    def test_attributes_present(self):
        log = generate_log(n_traces=10, seed=1)
        for trace in log.traces:
            assert trace.trace_attrs[OUTCOME_ATTRIBUTE].value in (
                POSITIVE_OUTCOME,
                NEGATIVE_OUTCOME,
            )
            assert trace.trace_attrs["region"].kind == "string"
            assert trace.trace_attrs["amount"].kind == "real"
            for event in trace.events:
                assert event.resource
                assert event.payload["channel"].kind == "string"

    def test_timestamps_strictly_increase(self):
        log = generate_log(n_traces=20, seed=2)
        for trace in log.traces:
            stamps = [e.timestamp for e in trace.events]
            assert all(a < b for a, b in zip(stamps, stamps[1:]))

    def test_ids_unique(self):
        log = generate_log(n_traces=30, seed=4)
        ids = [t.id for t in log.traces]
        assert len(set(ids)) == 30


class TestDeterminism:
    def test_same_seed_same_log(self):
        assert serialize_xes(generate_log(40, seed=9)) == serialize_xes(
            generate_log(40, seed=9)
        )

    def test_different_seed_different_log(self):
        assert serialize_xes(generate_log(40, seed=9)) != serialize_xes(
            generate_log(40, seed=10)
        )

    def test_round_trips_through_xes(self):
        log = generate_log(25, seed=5)
        again = parse_xes(serialize_xes(log))
        assert len(again.traces) == 25
        assert rule_accuracy(again) == rule_accuracy(log)


class TestPlantedSignal:
    def test_noise_free_signal_is_exact(self):
        assert rule_accuracy(generate_log(200, seed=0, noise=0.0)) == 1.0

    def test_default_noise_leaves_signal_strong(self):
        # 5% flips on 400 traces: the binomial spread keeps the rule
        # between these bounds with overwhelming probability
        acc = rule_accuracy(generate_log(400, seed=0))
        assert 0.91 <= acc <= 0.99

    def test_prefix_one_is_uninformative(self):
        # every trace starts identically, so nothing before the triage
        # step separates the classes
        log = generate_log(50, seed=6)
        assert {t.events[0].activity for t in log.traces} == {"register"}

    def test_durations_track_the_signal(self):
        log = generate_log(200, seed=7, noise=0.0)
        def total(trace):
            return (trace.events[-1].timestamp - trace.events[0].timestamp).total_seconds()
        fast = [total(t) for t in log.traces
                if t.events[SIGNAL_POSITION - 1].activity == FAST_TRIAGE]
        slow = [total(t) for t in log.traces
                if t.events[SIGNAL_POSITION - 1].activity == SLOW_TRIAGE]
        assert fast and slow
        assert max(fast) < min(slow)

    def test_cases_overlap_in_time(self):
        # staggered arrivals must leave at least one case open while the
        # next one starts, so workload features see real concurrency
        log = generate_log(30, seed=8)
        overlaps = 0
        for earlier, later in zip(log.traces, log.traces[1:]):
            if later.events[0].timestamp < earlier.events[-1].timestamp:
                overlaps += 1
        assert overlaps > 0

    def test_both_triage_branches_occur(self):
        log = generate_log(100, seed=11)
        seen = {t.events[SIGNAL_POSITION - 1].activity for t in log.traces}
        assert seen == {FAST_TRIAGE, SLOW_TRIAGE}


class TestValidation:
    def test_zero_traces_rejected(self):
        with pytest.raises(ValidationError):
            generate_log(n_traces=0)

    def test_noise_bounds(self):
        with pytest.raises(ValidationError):
            generate_log(10, noise=0.5)
        with pytest.raises(ValidationError):
            generate_log(10, noise=-0.01)

    def test_custom_start(self):
        start = dt.datetime(2030, 6, 1, tzinfo=dt.timezone.utc)
        log = generate_log(5, seed=0, start=start)
        assert log.traces[0].events[0].timestamp == start
