"""CI execution history: CSV ingestion, cycle grouping, status windows.

The raw input is a per-execution log. Each row records one run of one test
in one CI cycle; a test that did not run in a cycle simply has no row
there. From the grouped log we derive per-test status windows where
fail = +1, pass = 0 and not-executed = -1, with the most recent cycle in
the last slot.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadVerdict,
    DuplicateExecution,
    EmptyHistory,
    MalformedRow,
    MissingColumn,
    NegativeDuration,
)

FAIL = 1
PASS = 0
NOT_RUN = -1

DEFAULT_WINDOW = 10


class Verdict(Enum):
    PASSED = 0
    FAILED = 1


@dataclass(frozen=True)
class ExecutionRecord:
    """One execution of one test in one CI cycle."""

    test_id: int
    test_name: str
    duration_s: float
    last_run: datetime
    verdict: Verdict
    cycle_id: int
    prio: float | None = None

    def __post_init__(self):
        if self.duration_s < 0:
            raise ValueError(f"duration_s must be >= 0, got {self.duration_s}")
        if self.cycle_id < 1:
            raise ValueError(f"cycle_id must be >= 1, got {self.cycle_id}")

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAILED


@dataclass(frozen=True)
class CycleLog:
    """All executions of a single CI cycle, in stable input order."""

    cycle_id: int
    records: tuple[ExecutionRecord, ...]

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.cycle_id != self.cycle_id:
                raise ValueError(
                    f"record for test {rec.test_id} belongs to cycle {rec.cycle_id}, "
                    f"not {self.cycle_id}"
                )
            if rec.test_id in seen:
                raise DuplicateExecution(rec.test_id, self.cycle_id)
            seen.add(rec.test_id)


@dataclass(frozen=True)
class ColumnMapping:
    """Maps canonical fields to CSV header names."""

    id: str = "Id"
    name: str = "Name"
    duration: str = "Duration"
    last_run: str = "LastRun"
    verdict: str = "Verdict"
    cycle: str = "Cycle"
    prio: str | None = None  # optional ground-truth priority column

    def required(self) -> tuple[str, ...]:
        return (self.id, self.name, self.duration, self.last_run, self.verdict, self.cycle)


DEFAULT_COLUMNS = ColumnMapping()


def parse_timestamp(text: str) -> datetime:
    """Accepts YYYY-MM-DD and YYYY-MM-DD HH:MM:SS (fractional seconds ok)."""
    return datetime.fromisoformat(text.strip())


def ingest_csv(path: str | Path, schema: ColumnMapping = DEFAULT_COLUMNS) -> list[CycleLog]:
    """Parse an execution log CSV into cycle-grouped records.

    Cycles come back sorted ascending by id; record order inside a cycle is
    the file order. Verdict must be encoded 0 = pass, 1 = fail. Extra
    columns (e.g. LastResults) are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise MissingColumn(schema.id)
        for col in schema.required():
            if col not in header:
                raise MissingColumn(col)
        has_prio = schema.prio is not None and schema.prio in header

        by_cycle: dict[int, list[ExecutionRecord]] = {}
        seen: set[tuple[int, int]] = set()
        for rownum, row in enumerate(reader, start=2):
            rec = _parse_row(row, rownum, schema, has_prio)
            key = (rec.test_id, rec.cycle_id)
            if key in seen:
                raise DuplicateExecution(rec.test_id, rec.cycle_id)
            seen.add(key)
            by_cycle.setdefault(rec.cycle_id, []).append(rec)

    return [CycleLog(cid, tuple(by_cycle[cid])) for cid in sorted(by_cycle)]


def _parse_row(row: dict, rownum: int, schema: ColumnMapping, has_prio: bool) -> ExecutionRecord:
    try:
        test_id = int(row[schema.id])
    except (TypeError, ValueError):
        raise MalformedRow(rownum, f"bad id {row.get(schema.id)!r}") from None
    try:
        duration = float(row[schema.duration])
    except (TypeError, ValueError):
        raise MalformedRow(rownum, f"bad duration {row.get(schema.duration)!r}") from None
    if math.isnan(duration) or math.isinf(duration):
        raise MalformedRow(rownum, f"non-finite duration {duration}")
    if duration < 0:
        raise NegativeDuration(rownum, duration)
    try:
        last_run = parse_timestamp(row[schema.last_run])
    except (TypeError, ValueError):
        raise MalformedRow(rownum, f"bad timestamp {row.get(schema.last_run)!r}") from None
    verdict_raw = (row[schema.verdict] or "").strip()
    if verdict_raw not in ("0", "1"):
        raise BadVerdict(rownum, verdict_raw)
    try:
        cycle_id = int(row[schema.cycle])
    except (TypeError, ValueError):
        raise MalformedRow(rownum, f"bad cycle {row.get(schema.cycle)!r}") from None
    if cycle_id < 1:
        raise MalformedRow(rownum, f"cycle id must be >= 1, got {cycle_id}")
    prio = None
    if has_prio:
        raw = (row[schema.prio] or "").strip()
        if raw:
            try:
                prio = float(raw)
            except ValueError:
                raise MalformedRow(rownum, f"bad priority {raw!r}") from None
    return ExecutionRecord(
        test_id=test_id,
        test_name=row[schema.name],
        duration_s=duration,
        last_run=last_run,
        verdict=Verdict.FAILED if verdict_raw == "1" else Verdict.PASSED,
        cycle_id=cycle_id,
        prio=prio,
    )


def emit_csv(cycles: Iterable[CycleLog], path: str | Path,
             schema: ColumnMapping = DEFAULT_COLUMNS) -> None:
    """Write cycles back out in the ingestible CSV format (lossless)."""
    header = list(schema.required())
    if schema.prio is not None:
        header.append(schema.prio)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for cycle in cycles:
            for rec in cycle.records:
                row = [
                    rec.test_id,
                    rec.test_name,
                    repr(rec.duration_s),
                    rec.last_run.isoformat(sep=" "),
                    "1" if rec.failed else "0",
                    rec.cycle_id,
                ]
                if schema.prio is not None:
                    row.append("" if rec.prio is None else repr(rec.prio))
                writer.writerow(row)


@dataclass(frozen=True, eq=False)
class StatusMatrix:
    """Per-test execution-status windows plus duration/recency statistics.

    ``statuses[i]`` holds the last ``window_len`` cycle outcomes of test
    ``test_ids[i]``, most recent last, padded with -1 where the test did
    not run (or history is shorter than the window). ``mean_duration_s``
    averages over executed cycles only; a never-executed test gets 0 and a
    ``last_run`` of None.
    """

    test_ids: tuple
    window_len: int
    statuses: np.ndarray  # (n_tests, window_len) int8
    mean_duration_s: np.ndarray  # (n_tests,) float64
    last_run: tuple  # datetime | None per test

    def __post_init__(self):
        n = len(self.test_ids)
        if self.statuses.shape != (n, self.window_len):
            raise ValueError("statuses shape does not match test ids / window length")
        bad = ~np.isin(self.statuses, (NOT_RUN, PASS, FAIL))
        if bad.any():
            raise ValueError("statuses must be in {-1, 0, 1}")

    def __len__(self) -> int:
        return len(self.test_ids)

    def row(self, test_id) -> np.ndarray:
        return self.statuses[self.test_ids.index(test_id)]


def build_status_matrix(
    cycles: Sequence[CycleLog],
    window_len: int = DEFAULT_WINDOW,
    as_of_cycle: int | None = None,
    include_tests: Iterable | None = None,
) -> StatusMatrix:
    """Build per-test status windows ending at ``as_of_cycle``.

    Window slots correspond to cycle ids ``as_of-window_len+1 .. as_of``;
    a cycle id with no record for a test (including ids absent from the
    log altogether, and ids < 1) contributes -1. Mean duration and last
    run are taken over the full history up to ``as_of_cycle``, not just
    the window. ``include_tests`` forces rows for tests with no history
    yet (all -1, duration 0), which replay needs for first-time tests.
    """
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    ids = [c.cycle_id for c in cycles]
    if ids != sorted(ids):
        raise ValueError("cycles must be sorted ascending by cycle_id")
    if as_of_cycle is None:
        as_of_cycle = ids[-1] if ids else 0
    history = [c for c in cycles if c.cycle_id <= as_of_cycle]
    if not history:
        raise EmptyHistory(f"no cycles at or before {as_of_cycle}")

    order: list = []
    index: dict = {}
    for cycle in history:
        for rec in cycle.records:
            if rec.test_id not in index:
                index[rec.test_id] = len(order)
                order.append(rec.test_id)
    if include_tests is not None:
        for tid in include_tests:
            if tid not in index:
                index[tid] = len(order)
                order.append(tid)

    n = len(order)
    statuses = np.full((n, window_len), NOT_RUN, dtype=np.int8)
    dur_sum = np.zeros(n)
    dur_count = np.zeros(n)
    last_run: list = [None] * n
    window_lo = as_of_cycle - window_len + 1
    for cycle in history:
        slot = cycle.cycle_id - window_lo
        for rec in cycle.records:
            i = index[rec.test_id]
            if slot >= 0:
                statuses[i, slot] = FAIL if rec.failed else PASS
            dur_sum[i] += rec.duration_s
            dur_count[i] += 1
            if last_run[i] is None or rec.last_run > last_run[i]:
                last_run[i] = rec.last_run

    mean = np.divide(dur_sum, dur_count, out=np.zeros(n), where=dur_count > 0)
    return StatusMatrix(
        test_ids=tuple(order),
        window_len=window_len,
        statuses=statuses,
        mean_duration_s=mean,
        last_run=tuple(last_run),
    )
