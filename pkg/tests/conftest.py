from __future__ import annotations

import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from ppmkit.eventlog import AttributeValue, Event, EventLog, Trace

sys.path.insert(0, str(Path(__file__).parent))

BASE_TIME = datetime(2024, 1, 1, tzinfo=timezone.utc)

# verdicts collected from tests marked @pytest.mark.criterion, printed as a
# terminal-summary section so they survive output capture
_CRITERION_RESULTS: list[tuple[str, bool]] = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion this test enforces"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERION_RESULTS.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _CRITERION_RESULTS:
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}")


def wrap(value) -> AttributeValue:
    """Wrap a plain Python scalar as a typed attribute value."""
    if isinstance(value, AttributeValue):
        return value
    if isinstance(value, bool):
        return AttributeValue("boolean", value)
    if isinstance(value, int):
        return AttributeValue("integer", value)
    if isinstance(value, float):
        return AttributeValue("real", value)
    if isinstance(value, datetime):
        return AttributeValue("timestamp", value)
    return AttributeValue("string", str(value))


def ev(activity: str, minutes: float, resource: str | None = None, **payload) -> Event:
    return Event(
        activity=activity,
        timestamp=BASE_TIME + timedelta(minutes=minutes),
        resource=resource,
        payload={k: wrap(v) for k, v in payload.items()},
    )


def tr(trace_id: str, events, **attrs) -> Trace:
    return Trace(id=trace_id, events=tuple(events), trace_attrs={k: wrap(v) for k, v in attrs.items()})


def mklog(traces, name: str = "testlog") -> EventLog:
    return EventLog(name=name, traces=tuple(traces))
