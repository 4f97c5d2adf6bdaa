"""Turn predicted priorities into an ordering and a budget-fitted subset."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import MalformedRow, MissingColumn, NonFinitePriority

OVER_BUDGET = "over_budget"


@dataclass(frozen=True)
class RankedTest:
    test_id: object
    priority: float
    mean_duration_s: float = 0.0


@dataclass(frozen=True)
class PrioritizedSuite:
    """Tests in non-increasing priority order; ties keep input order."""

    tests: tuple[RankedTest, ...]

    def __len__(self) -> int:
        return len(self.tests)

    def order(self) -> list:
        return [t.test_id for t in self.tests]


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[RankedTest, ...]
    skipped: tuple[tuple[object, str], ...]  # (test_id, reason)
    budget_s: float
    used_s: float

    def order(self) -> list:
        return [t.test_id for t in self.selected]


def rank(predictions: Iterable[tuple[object, float]],
         durations: Mapping[object, float] | None = None) -> PrioritizedSuite:
    """Stable descending sort by priority."""
    entries = []
    for test_id, prio in predictions:
        if not math.isfinite(prio):
            raise NonFinitePriority(test_id)
        dur = float(durations.get(test_id, 0.0)) if durations is not None else 0.0
        entries.append(RankedTest(test_id, float(prio), dur))
    entries.sort(key=lambda t: -t.priority)  # sort is stable
    return PrioritizedSuite(tuple(entries))


def select_within_budget(suite: PrioritizedSuite, budget_s: float) -> SelectionResult:
    """Greedy walk in priority order.

    A test is taken iff its duration fits the remaining budget; otherwise
    it is skipped and the walk continues, so cheaper lower-priority tests
    can still fill the gap.
    """
    if budget_s < 0:
        raise ValueError(f"budget must be >= 0, got {budget_s}")
    remaining = budget_s
    selected: list[RankedTest] = []
    skipped: list[tuple[object, str]] = []
    for test in suite.tests:
        if test.mean_duration_s <= remaining:
            selected.append(test)
            remaining -= test.mean_duration_s
        else:
            skipped.append((test.test_id, OVER_BUDGET))
    return SelectionResult(
        selected=tuple(selected),
        skipped=tuple(skipped),
        budget_s=budget_s,
        used_s=budget_s - remaining,
    )


# --- CI-facing output formats ----------------------------------------------

_SUITE_HEADER = ["rank", "test_id", "priority", "duration_s"]


def write_suite_csv(suite: PrioritizedSuite, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SUITE_HEADER)
        for pos, t in enumerate(suite.tests, start=1):
            writer.writerow([pos, t.test_id, repr(t.priority), repr(t.mean_duration_s)])


def read_suite_csv(path: str | Path) -> PrioritizedSuite:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _SUITE_HEADER:
            raise MissingColumn("rank")
        tests = []
        for rownum, row in enumerate(reader, start=2):
            try:
                tests.append(RankedTest(_parse_id(row[1]), float(row[2]), float(row[3])))
            except (IndexError, ValueError) as exc:
                raise MalformedRow(rownum, str(exc)) from None
    return PrioritizedSuite(tuple(tests))


def write_order(tests: Iterable, path: str | Path) -> None:
    """Plain one-id-per-line list for CI consumption."""
    Path(path).write_text("".join(f"{tid}\n" for tid in tests), encoding="utf-8")


def _parse_id(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw
