"""Model inputs: turn a status window plus duration/recency stats into a
fixed-width feature vector.

With the default 10-cycle window a vector flattens to 14 numbers: the 10
raw statuses, then normalized mean duration, normalized last-run time,
the swing between oldest and newest status, and the count of pass-to-fail
flips among executed cycles.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import MalformedRow, MissingColumn, OutOfRange, WindowLenMismatch
from .history import DEFAULT_WINDOW, NOT_RUN, PASS, FAIL, StatusMatrix

DERIVED_FEATURES = 4  # duration, last run, distance, change-in-status


@dataclass(frozen=True)
class FeatureVector:
    test_id: object
    es_window: tuple[int, ...]
    duration_norm: float
    last_run_norm: float
    distance: int
    change_in_status: int
    label_priority: float | None = None

    def flatten(self) -> np.ndarray:
        return np.array(
            [*self.es_window, self.duration_norm, self.last_run_norm,
             self.distance, self.change_in_status],
            dtype=np.float64,
        )

    def with_label(self, label: float) -> "FeatureVector":
        return replace(self, label_priority=label)


@dataclass(frozen=True)
class FeatureBounds:
    """Suite-relative normalization bounds, persisted with a model so that
    prediction-time inputs are scaled exactly like training inputs."""

    duration_min: float
    duration_max: float
    lastrun_earliest: datetime | None
    lastrun_latest: datetime | None


def bounds_from_matrix(matrix: StatusMatrix) -> FeatureBounds:
    durs = matrix.mean_duration_s
    stamps = [ts for ts in matrix.last_run if ts is not None]
    return FeatureBounds(
        duration_min=float(durs.min()) if len(durs) else 0.0,
        duration_max=float(durs.max()) if len(durs) else 0.0,
        lastrun_earliest=min(stamps) if stamps else None,
        lastrun_latest=max(stamps) if stamps else None,
    )


def normalize_duration(mean_duration_s: float, suite_min: float, suite_max: float) -> float:
    """Min-max scale into [0,1]; a degenerate suite (min == max) maps to 0.5."""
    if suite_min > suite_max:
        raise ValueError(f"suite_min {suite_min} > suite_max {suite_max}")
    if suite_min == suite_max:
        return 0.5
    x = (mean_duration_s - suite_min) / (suite_max - suite_min)
    return float(min(1.0, max(0.0, x)))


def encode_last_run(ts: datetime, suite_earliest: datetime, suite_latest: datetime) -> float:
    """Fraction of the suite's time span elapsed at ``ts`` (day resolution
    plus fractional days)."""
    if not (suite_earliest <= ts <= suite_latest):
        raise OutOfRange(ts, suite_earliest, suite_latest)
    if suite_earliest == suite_latest:
        return 0.5
    span = (suite_latest - suite_earliest).total_seconds()
    return (ts - suite_earliest).total_seconds() / span


def _encode_last_run_clipped(ts: datetime | None, bounds: FeatureBounds) -> float:
    # Prediction-time timestamps may fall outside the persisted training
    # bounds; clip instead of failing. Never-executed tests map to 0.
    if ts is None or bounds.lastrun_earliest is None or bounds.lastrun_latest is None:
        return 0.0
    if bounds.lastrun_earliest == bounds.lastrun_latest:
        return 0.5
    span = (bounds.lastrun_latest - bounds.lastrun_earliest).total_seconds()
    x = (ts - bounds.lastrun_earliest).total_seconds() / span
    return float(min(1.0, max(0.0, x)))


def distance(window: Sequence[int]) -> int:
    """Absolute swing between the oldest and newest raw status code."""
    if len(window) == 0:
        raise ValueError("window must be non-empty")
    return abs(int(window[-1]) - int(window[0]))


def change_in_status(window: Sequence[int]) -> int:
    """Count pass-to-fail flips between consecutive *executed* cycles."""
    if len(window) == 0:
        raise ValueError("window must be non-empty")
    executed = [int(s) for s in window if s != NOT_RUN]
    return sum(1 for a, b in zip(executed, executed[1:]) if a == PASS and b == FAIL)


def extract(
    matrix: StatusMatrix,
    bounds: FeatureBounds | None = None,
    expected_window: int = DEFAULT_WINDOW,
) -> list[FeatureVector]:
    """One unlabeled FeatureVector per matrix row, order preserved.

    Normalizer bounds default to suite-relative min/max over the same
    matrix; pass persisted bounds to reproduce training-time scaling at
    prediction time (out-of-range values are clipped into [0,1]).
    """
    if matrix.window_len != expected_window:
        raise WindowLenMismatch(matrix.window_len, expected_window)
    if bounds is None:
        bounds = bounds_from_matrix(matrix)
    vectors = []
    for i, tid in enumerate(matrix.test_ids):
        window = tuple(int(s) for s in matrix.statuses[i])
        vectors.append(
            FeatureVector(
                test_id=tid,
                es_window=window,
                duration_norm=normalize_duration(
                    float(matrix.mean_duration_s[i]), bounds.duration_min, bounds.duration_max
                ),
                last_run_norm=_encode_last_run_clipped(matrix.last_run[i], bounds),
                distance=distance(window),
                change_in_status=change_in_status(window),
            )
        )
    return vectors


def stack(vectors: Sequence[FeatureVector]) -> tuple[np.ndarray, np.ndarray | None, list]:
    """Stack vectors into an (n, d) input matrix, labels and ids."""
    X = np.stack([v.flatten() for v in vectors])
    labels = None
    if all(v.label_priority is not None for v in vectors):
        labels = np.array([v.label_priority for v in vectors], dtype=np.float64)
    return X, labels, [v.test_id for v in vectors]


def feature_matrix(matrix: StatusMatrix, bounds: FeatureBounds | None = None,
                   expected_window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Vectorized equivalent of ``stack(extract(...))[0]``.

    Used on the per-cycle prioritization path, where building one object
    per test would dominate the ranking cost for large suites.
    """
    if matrix.window_len != expected_window:
        raise WindowLenMismatch(matrix.window_len, expected_window)
    if bounds is None:
        bounds = bounds_from_matrix(matrix)
    statuses = matrix.statuses.astype(np.float64)
    n, w = statuses.shape

    span = bounds.duration_max - bounds.duration_min
    if span == 0:
        dur = np.full(n, 0.5)
    else:
        dur = np.clip((matrix.mean_duration_s - bounds.duration_min) / span, 0.0, 1.0)
    lastrun = np.array([_encode_last_run_clipped(ts, bounds) for ts in matrix.last_run])

    swing = np.abs(statuses[:, -1] - statuses[:, 0])
    flips = np.zeros(n)
    prev = np.full(n, float(NOT_RUN))
    for j in range(w):
        cur = statuses[:, j]
        executed = cur != NOT_RUN
        flips += ((prev == PASS) & (cur == FAIL)).astype(np.float64)
        prev = np.where(executed, cur, prev)
    return np.column_stack([statuses, dur, lastrun, swing, flips])


# --- debug CSV dump: id + window + 4 derived + optional label -------------

def dump_features_csv(vectors: Sequence[FeatureVector], path: str | Path) -> None:
    if not vectors:
        raise ValueError("nothing to dump")
    w = len(vectors[0].es_window)
    header = ["Id"] + [f"ES{i}" for i in range(1, w + 1)] + [
        "Duration", "LastRun", "Distance", "ChangeInStatus", "Priority",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for v in vectors:
            writer.writerow(
                [v.test_id, *v.es_window, repr(v.duration_norm), repr(v.last_run_norm),
                 v.distance, v.change_in_status,
                 "" if v.label_priority is None else repr(v.label_priority)]
            )


def load_features_csv(path: str | Path) -> list[FeatureVector]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MissingColumn("Id")
        es_cols = [c for c in header if c.startswith("ES")]
        expected = ["Id"] + es_cols + ["Duration", "LastRun", "Distance",
                                       "ChangeInStatus", "Priority"]
        if header != expected or not es_cols:
            raise MissingColumn("ES1")
        w = len(es_cols)
        vectors = []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRow(rownum, f"expected {len(header)} fields, got {len(row)}")
            try:
                vectors.append(
                    FeatureVector(
                        test_id=_parse_id(row[0]),
                        es_window=tuple(int(x) for x in row[1 : 1 + w]),
                        duration_norm=float(row[1 + w]),
                        last_run_norm=float(row[2 + w]),
                        distance=int(row[3 + w]),
                        change_in_status=int(row[4 + w]),
                        label_priority=float(row[5 + w]) if row[5 + w] else None,
                    )
                )
            except ValueError as exc:
                raise MalformedRow(rownum, str(exc)) from None
    return vectors


def _parse_id(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw
