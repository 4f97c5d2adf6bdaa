"""Evaluation metrics: fault-detection effectiveness of an ordering,
regression accuracy of the model, and wall-clock phase accounting.

Metrics that are undefined for an input (no faults, zero label variance)
come back as None rather than NaN, so reports can spell out
"not applicable" instead of propagating garbage.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, UnbalancedPhaseEvents


@dataclass(frozen=True)
class CycleOutcome:
    """Executed tests of one replayed cycle, in execution order.

    In replay each failing test counts as one distinct fault.
    ``total_known_faults`` covers faults outside the executed portion
    (budget-truncated runs); it defaults to the detected count.
    """

    failed: tuple[bool, ...]
    duration_s: tuple[float, ...]
    total_known_faults: int | None = None

    def __post_init__(self):
        if len(self.failed) != len(self.duration_s):
            raise LengthMismatch(len(self.failed), len(self.duration_s))
        if self.total_known_faults is not None and self.total_known_faults < sum(self.failed):
            raise ValueError("total_known_faults smaller than detected faults")

    @property
    def fault_positions(self) -> list[int]:
        """1-based positions of the tests that revealed a fault."""
        return [i for i, f in enumerate(self.failed, start=1) if f]


def apfd(outcome: CycleOutcome) -> float | None:
    """Average percentage of faults detected: 1 - sum(TF)/(n*m) + 1/(2n).

    Assumes the executed order contains every fault (full-suite replay).
    None when there is nothing executed or no fault to detect.
    """
    n = len(outcome.failed)
    positions = outcome.fault_positions
    m = len(positions)
    if n == 0 or m == 0:
        return None
    return 1.0 - sum(positions) / (n * m) + 1.0 / (2 * n)


def napfd(outcome: CycleOutcome) -> float | None:
    """APFD normalized for partial suites: p - sum(TF)/(n*m) + p/(2n) with
    p = detected/m over all known faults; undetected faults contribute 0."""
    positions = outcome.fault_positions
    m_total = outcome.total_known_faults
    if m_total is None:
        m_total = len(positions)
    if m_total == 0:
        return None
    n = len(outcome.failed)
    if n == 0:
        return 0.0
    p = len(positions) / m_total
    return p - sum(positions) / (n * m_total) + p / (2 * n)


@dataclass(frozen=True)
class TimeMetrics:
    first_fault_s: float | None  # FT
    last_fault_s: float | None  # LT
    avg_fault_s: float | None  # AT


def time_metrics(outcome: CycleOutcome) -> TimeMetrics:
    """Cumulative execution time until the first/last fault and the mean
    over all fault detections."""
    positions = outcome.fault_positions
    if not positions:
        return TimeMetrics(None, None, None)
    cumulative = np.cumsum(outcome.duration_s)
    at_faults = [float(cumulative[p - 1]) for p in positions]
    return TimeMetrics(at_faults[0], at_faults[-1], float(np.mean(at_faults)))


@dataclass(frozen=True)
class RegressionAccuracy:
    mse: float
    r_squared: float | None  # None when the labels have zero variance
    residual_std: float


def regression_accuracy(preds: Sequence[float], labels: Sequence[float]) -> RegressionAccuracy:
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if preds.shape != labels.shape:
        raise LengthMismatch(preds.size, labels.size)
    if preds.size < 2:
        raise ValueError("need at least 2 points")
    residuals = preds - labels
    mse = float(residuals @ residuals / residuals.size)
    ss_tot = float(np.sum((labels - labels.mean()) ** 2))
    r_squared = None if ss_tot == 0.0 else 1.0 - (residuals @ residuals) / ss_tot
    return RegressionAccuracy(mse, r_squared, float(residuals.std()))


# --- wall-clock phases ------------------------------------------------------

PHASE_PROCESS = "process"  # dataset handling, training, validation -> PT
PHASE_PRIORITIZE = "prioritize"  # predict + rank + select            -> RT
PHASE_TOTAL = "total"  # whole run                                    -> TT

PhaseEvent = tuple[str, str, float]  # (phase, "start"|"stop", timestamp)


class PhaseTimer:
    """Collects start/stop events; a phase may open and close many times."""

    def __init__(self, clock=time.perf_counter):
        self._clock = clock
        self.events: list[PhaseEvent] = []

    def start(self, phase: str) -> None:
        self.events.append((phase, "start", self._clock()))

    def stop(self, phase: str) -> None:
        self.events.append((phase, "stop", self._clock()))

    @contextmanager
    def phase(self, name: str):
        self.start(name)
        try:
            yield self
        finally:
            self.stop(name)


def phase_totals(events: Sequence[PhaseEvent]) -> dict[str, float]:
    """Wall-clock seconds per phase, summed over all of its spans."""
    totals: dict[str, float] = {}
    open_at: dict[str, float] = {}
    for phase, kind, stamp in events:
        if kind == "start":
            if phase in open_at:
                raise UnbalancedPhaseEvents(phase)
            open_at[phase] = stamp
        elif kind == "stop":
            if phase not in open_at:
                raise UnbalancedPhaseEvents(phase)
            totals[phase] = totals.get(phase, 0.0) + (stamp - open_at.pop(phase))
        else:
            raise UnbalancedPhaseEvents(phase)
    if open_at:
        raise UnbalancedPhaseEvents(next(iter(open_at)))
    return totals


def stopwatch_metrics(events: Sequence[PhaseEvent]) -> dict[str, float]:
    """The three run-level numbers: PT (processing + training + validation),
    RT (prioritization) and TT (everything)."""
    totals = phase_totals(events)
    return {
        "PT": totals.get(PHASE_PROCESS, 0.0),
        "RT": totals.get(PHASE_PRIORITIZE, 0.0),
        "TT": totals.get(PHASE_TOTAL, 0.0),
    }


# --- report formatting ------------------------------------------------------

def format_table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Aligned plain-text table; None renders as n/a."""
    def cell(x):
        if x is None:
            return "n/a"
        if isinstance(x, float):
            return f"{x:.4f}"
        return str(x)

    grid = [[cell(x) for x in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in grid)) if grid else len(h)
              for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    lines.extend(fmt.format(*row) for row in grid)
    return "\n".join(lines)
