from __future__ import annotations

from datetime import datetime, timedelta

import pytest

from testprio.history import CycleLog, ExecutionRecord, Verdict

BASE_DAY = datetime(2016, 1, 1)


def rec(test_id, cycle, failed=False, duration=1.0, day=None, prio=None):
    when = day if day is not None else BASE_DAY + timedelta(days=cycle - 1)
    return ExecutionRecord(
        test_id=test_id,
        test_name=f"T{test_id}",
        duration_s=duration,
        last_run=when,
        verdict=Verdict.FAILED if failed else Verdict.PASSED,
        cycle_id=cycle,
    )


def cycles_from(rows):
    """Build sorted CycleLogs from (test_id, cycle, failed, duration) tuples."""
    by_cycle = {}
    for row in rows:
        test_id, cycle, failed = row[0], row[1], row[2]
        duration = row[3] if len(row) > 3 else 1.0
        by_cycle.setdefault(cycle, []).append(rec(test_id, cycle, failed, duration))
    return [CycleLog(c, tuple(by_cycle[c])) for c in sorted(by_cycle)]


@pytest.fixture
def tiny_history():
    """3 tests over 5 cycles with a couple of failures."""
    return cycles_from([
        (1, 1, False, 2.0), (2, 1, True, 3.0),
        (1, 2, False, 2.2), (2, 2, True, 3.1), (3, 2, False, 1.0),
        (1, 3, True, 2.1), (3, 3, False, 1.1),
        (2, 4, False, 3.0), (3, 4, False, 0.9),
        (1, 5, False, 2.0), (2, 5, True, 2.9), (3, 5, False, 1.0),
    ])
