"""End-to-end orchestration: train on pre-cut history, then replay every
post-cut cycle, re-ranking its tests with each strategy and scoring the
orderings.

The replay is causal: the ordering for cycle c is computed from cycles
strictly before c. History is carried in an incremental per-test state so
prioritization cost does not grow with the length of the already-processed
log.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .augment import AugmentConfig, augment, fail_ratio
from .config import get_bool, get_float, get_int
from .errors import InputError, InsufficientHistory, MissingPriorityColumn
from .features import FeatureBounds, bounds_from_matrix, extract, feature_matrix, stack
from .history import (
    ColumnMapping,
    CycleLog,
    NOT_RUN,
    StatusMatrix,
    build_status_matrix,
    ingest_csv,
)
from .metrics import (
    CycleOutcome,
    PHASE_PRIORITIZE,
    PHASE_PROCESS,
    PHASE_TOTAL,
    PhaseTimer,
    RegressionAccuracy,
    apfd,
    format_table,
    napfd,
    phase_totals,
    regression_accuracy,
    stopwatch_metrics,
    time_metrics,
)
from .net import (
    SavedModel,
    TrainConfig,
    TrainResult,
    default_dims,
    predict,
    save_model,
    train,
    xavier_init,
)
from .prioritize import PrioritizedSuite, RankedTest, rank, select_within_budget
from .rocket import WeightScheme, label_dataset, priorities, weight_scheme

logger = logging.getLogger(__name__)

STRATEGY_DEEPORDER = "deeporder"
STRATEGY_ROCKET = "rocket"
STRATEGY_RANDOM = "random"
STRATEGY_UNTREATED = "untreated"
ALL_STRATEGIES = (STRATEGY_DEEPORDER, STRATEGY_ROCKET, STRATEGY_RANDOM, STRATEGY_UNTREATED)

# The train() op defaults to full batch; the harness overrides it because on
# replay-sized training sets mini-batches reach the MSE floor orders of
# magnitude faster within the same epoch cap. train.batch_size = 0 restores
# full-batch behavior.
DEFAULT_BATCH_SIZE = 128


@dataclass
class ExperimentPlan:
    dataset: object  # path to a CSV, or an in-memory list[CycleLog]
    window_len: int = 10
    cut_cycle: int | None = None  # None: cut at cut_fraction of the cycles
    cut_fraction: float = 0.8
    budget_fraction: float = 0.5
    strategies: tuple[str, ...] = ALL_STRATEGIES
    random_repeats: int = 30
    weights: str = "linear"
    augment_enabled: bool = True
    augment_config: AugmentConfig | None = None
    train_config: TrainConfig | None = None
    retrain_every: int | None = None
    seed: int = 0
    out_dir: object = None
    name: str | None = None

    def dataset_name(self) -> str:
        if self.name:
            return self.name
        if isinstance(self.dataset, (str, Path)):
            return Path(self.dataset).stem
        return "dataset"


def plan_from_config(cfg: dict[str, str], **overrides) -> "ExperimentPlan":
    """Build a plan from flat config keys; explicit overrides win."""
    aug = AugmentConfig(
        k_neighbors=get_int(cfg, "augment.k_neighbors", 5),
        target_fail_ratio=get_float(cfg, "augment.target_fail_ratio", 0.05),
        noise_scale=get_float(cfg, "augment.noise_scale", 0.02),
        pass_keep_fraction=get_float(cfg, "augment.pass_keep_fraction", 1.0),
        rng_seed=get_int(cfg, "augment.rng_seed", 0),
    )
    tr = TrainConfig(
        epochs_max=get_int(cfg, "train.epochs_max", 1000),
        learning_rate=get_float(cfg, "train.learning_rate", 0.001),
        adam_beta1=get_float(cfg, "train.adam_beta1", 0.9),
        adam_beta2=get_float(cfg, "train.adam_beta2", 0.999),
        adam_eps=get_float(cfg, "train.adam_eps", 1e-8),
        mse_stop=get_float(cfg, "train.mse_stop", 1e-4),
        batch_size=(get_int(cfg, "train.batch_size", DEFAULT_BATCH_SIZE) or None),
        rng_seed=get_int(cfg, "train.rng_seed", 0),
    )
    plan = ExperimentPlan(
        dataset=cfg.get("replay.dataset"),
        window_len=get_int(cfg, "replay.window_len", 10),
        cut_cycle=(get_int(cfg, "replay.cut_cycle", 0) or None),
        cut_fraction=get_float(cfg, "replay.cut_fraction", 0.8),
        budget_fraction=get_float(cfg, "replay.budget_fraction", 0.5),
        random_repeats=get_int(cfg, "replay.random_repeats", 30),
        weights=cfg.get("rocket.weights", "linear"),
        augment_enabled=get_bool(cfg, "augment.enabled", True),
        augment_config=aug,
        train_config=tr,
        retrain_every=(get_int(cfg, "replay.retrain_every", 0) or None),
        seed=get_int(cfg, "seed", 0),
    )
    if "replay.strategies" in cfg:
        plan.strategies = tuple(
            s.strip() for s in cfg["replay.strategies"].split(",") if s.strip()
        )
    for key, value in overrides.items():
        if value is not None:
            setattr(plan, key, value)
    return plan


# --- incremental replay state ----------------------------------------------

class ReplayState:
    """Per-test rolling status window, duration stats and recency.

    Equivalent to rebuilding a StatusMatrix from scratch at every cycle
    (see the cross-check test) but amortized O(1) per record, which keeps
    per-cycle prioritization time independent of history length.
    """

    def __init__(self, window_len: int):
        self.window_len = window_len
        self.index: dict = {}
        self.ids: list = []
        self.statuses = np.empty((0, window_len), dtype=np.int8)
        self.dur_sum = np.empty(0)
        self.dur_count = np.empty(0)
        self.last_run: list = []
        self.cycle = 0  # cycle id the last window slot corresponds to

    @classmethod
    def from_cycles(cls, cycles: Sequence[CycleLog], window_len: int,
                    as_of_cycle: int) -> "ReplayState":
        state = cls(window_len)
        for cycle in cycles:
            if cycle.cycle_id > as_of_cycle:
                break
            state.ingest(cycle)
        state.advance_to(as_of_cycle)
        return state

    def ensure_rows(self, test_ids) -> None:
        fresh = [tid for tid in test_ids if tid not in self.index]
        if not fresh:
            return
        for tid in fresh:
            self.index[tid] = len(self.ids)
            self.ids.append(tid)
            self.last_run.append(None)
        pad = np.full((len(fresh), self.window_len), NOT_RUN, dtype=np.int8)
        self.statuses = np.vstack([self.statuses, pad])
        self.dur_sum = np.concatenate([self.dur_sum, np.zeros(len(fresh))])
        self.dur_count = np.concatenate([self.dur_count, np.zeros(len(fresh))])

    def advance_to(self, cycle_id: int) -> None:
        if cycle_id < self.cycle:
            raise ValueError("replay state cannot move backwards")
        shift = cycle_id - self.cycle
        if shift == 0 or len(self.ids) == 0:
            self.cycle = cycle_id
            return
        if shift >= self.window_len:
            self.statuses[:] = NOT_RUN
        else:
            self.statuses[:, :-shift] = self.statuses[:, shift:]
            self.statuses[:, -shift:] = NOT_RUN
        self.cycle = cycle_id

    def ingest(self, cycle: CycleLog) -> None:
        self.ensure_rows([rec.test_id for rec in cycle.records])
        self.advance_to(cycle.cycle_id)
        for rec in cycle.records:
            i = self.index[rec.test_id]
            self.statuses[i, -1] = 1 if rec.failed else 0
            self.dur_sum[i] += rec.duration_s
            self.dur_count[i] += 1
            if self.last_run[i] is None or rec.last_run > self.last_run[i]:
                self.last_run[i] = rec.last_run

    def matrix_for(self, test_ids) -> StatusMatrix:
        self.ensure_rows(test_ids)
        rows = [self.index[tid] for tid in test_ids]
        mean = np.divide(
            self.dur_sum[rows],
            self.dur_count[rows],
            out=np.zeros(len(rows)),
            where=self.dur_count[rows] > 0,
        )
        return StatusMatrix(
            test_ids=tuple(test_ids),
            window_len=self.window_len,
            statuses=self.statuses[rows].copy(),
            mean_duration_s=mean,
            last_run=tuple(self.last_run[r] for r in rows),
        )


# --- training ----------------------------------------------------------------

def training_vectors(cycles: Sequence[CycleLog], window_len: int, scheme: WeightScheme,
                     bounds: FeatureBounds):
    """Pool labeled vectors over every historical as-of point.

    For each cycle a, the tests that executed in a contribute one vector
    whose window ends at a. This is the supervised set the model learns
    from; the same construction (on post-cut cycles) yields held-out pairs.
    """
    state = ReplayState(window_len)
    vectors = []
    for cycle in cycles:
        state.ingest(cycle)
        matrix = state.matrix_for([rec.test_id for rec in cycle.records])
        vectors.extend(label_dataset(matrix, scheme, bounds=bounds))
    return vectors


def train_model(cycles: Sequence[CycleLog], plan: ExperimentPlan
                ) -> tuple[SavedModel, TrainResult]:
    """Label the pre-cut history, optionally rebalance, and fit the network."""
    scheme = weight_scheme(plan.weights, plan.window_len)
    as_of = cycles[-1].cycle_id
    base = build_status_matrix(cycles, plan.window_len, as_of_cycle=as_of)
    bounds = bounds_from_matrix(base)
    labeled = training_vectors(cycles, plan.window_len, scheme, bounds)
    aug_cfg = plan.augment_config or AugmentConfig(rng_seed=plan.seed)
    if plan.augment_enabled and fail_ratio(labeled) < aug_cfg.target_fail_ratio:
        before = len(labeled)
        labeled = augment(labeled, aug_cfg)
        logger.info("augmented training set: %d -> %d vectors", before, len(labeled))
    X, y, _ = stack(labeled)
    cfg = plan.train_config or TrainConfig(rng_seed=plan.seed, batch_size=DEFAULT_BATCH_SIZE)
    net = xavier_init(default_dims(plan.window_len + 4), np.random.default_rng(cfg.rng_seed))
    result = train(net, X, y, cfg)
    model = SavedModel(net, bounds, weight_scheme=plan.weights, rng_seed=cfg.rng_seed)
    return model, result


# --- replay ------------------------------------------------------------------

@dataclass
class PipelineResult:
    plan: ExperimentPlan
    cut_cycle: int
    per_cycle: list[dict]
    aggregates: list[dict]
    timings: dict[str, float]
    phases: dict[str, float]
    model: SavedModel | None
    training: TrainResult | None
    holdout: RegressionAccuracy | None
    holdout_pairs: tuple[np.ndarray, np.ndarray] | None
    paths: dict[str, Path] = field(default_factory=dict)


def _load_cycles(plan: ExperimentPlan) -> list[CycleLog]:
    if isinstance(plan.dataset, (str, Path)):
        return ingest_csv(plan.dataset)
    if plan.dataset is None:
        raise InputError("no dataset given (set replay.dataset or pass a path)")
    return list(plan.dataset)


def _resolve_cut(plan: ExperimentPlan, cycle_ids: list[int]) -> int:
    if len(cycle_ids) < 2:
        raise InputError("need at least 2 cycles to split into train and replay")
    if plan.cut_cycle is not None:
        if not cycle_ids[0] <= plan.cut_cycle < cycle_ids[-1]:
            raise InputError(
                f"cut cycle {plan.cut_cycle} must lie inside [{cycle_ids[0]}, {cycle_ids[-1]})"
            )
        return plan.cut_cycle
    idx = int(round(plan.cut_fraction * len(cycle_ids))) - 1
    idx = max(0, min(len(cycle_ids) - 2, idx))
    return cycle_ids[idx]


def _strategy_suite(strategy: str, ids: list, matrix: StatusMatrix,
                    mean_dur: dict, model: SavedModel | None,
                    scheme: WeightScheme) -> PrioritizedSuite:
    if strategy == STRATEGY_DEEPORDER:
        X = feature_matrix(matrix, bounds=model.bounds,
                           expected_window=matrix.window_len)
        preds = np.clip(predict(model.net, X), 0.0, 1.0)
        return rank(zip(ids, preds.tolist()), durations=mean_dur)
    if strategy == STRATEGY_ROCKET:
        prios = priorities(matrix.statuses, scheme)
        return rank(zip(ids, prios.tolist()), durations=mean_dur)
    if strategy == STRATEGY_UNTREATED:
        return rank(((tid, 0.0) for tid in ids), durations=mean_dur)
    raise InputError(f"unknown strategy {strategy!r}")


def _evaluate_order(suite: PrioritizedSuite, failed: dict, actual_dur: dict,
                    n_faults: int, budget_s: float) -> dict:
    order = suite.order()
    full = CycleOutcome(
        failed=tuple(failed[t] for t in order),
        duration_s=tuple(actual_dur[t] for t in order),
    )
    tm = time_metrics(full)
    selection = select_within_budget(suite, budget_s)
    sel_ids = selection.order()
    partial = CycleOutcome(
        failed=tuple(failed[t] for t in sel_ids),
        duration_s=tuple(actual_dur[t] for t in sel_ids),
        total_known_faults=n_faults,
    )
    return {
        "apfd": apfd(full),
        "napfd": napfd(partial),
        "ft_s": tm.first_fault_s,
        "lt_s": tm.last_fault_s,
        "at_s": tm.avg_fault_s,
        "n_selected": len(sel_ids),
        "detected": sum(partial.failed),
        "used_s": selection.used_s,
    }


def _mean_or_none(values: list) -> float | None:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


_STRATEGY_ALIASES = {"untreated-order": STRATEGY_UNTREATED}


def run_pipeline(plan: ExperimentPlan) -> PipelineResult:
    plan.strategies = tuple(_STRATEGY_ALIASES.get(s, s) for s in plan.strategies)
    for strategy in plan.strategies:
        if strategy not in ALL_STRATEGIES:
            raise InputError(f"unknown strategy {strategy!r}; choose from {ALL_STRATEGIES}")
    if not plan.strategies:
        raise InputError("no strategies selected")

    timer = PhaseTimer()
    rows: list[dict] = []
    model: SavedModel | None = None
    training: TrainResult | None = None
    holdout_preds: list[float] = []
    holdout_labels: list[float] = []
    dataset_name = plan.dataset_name()

    with timer.phase(PHASE_TOTAL):
        with timer.phase(PHASE_PROCESS):
            cycles = _load_cycles(plan)
            cycle_ids = [c.cycle_id for c in cycles]
            cut = _resolve_cut(plan, cycle_ids)
            train_cycles = [c for c in cycles if c.cycle_id <= cut]
            eval_cycles = [c for c in cycles if c.cycle_id > cut]
            scheme = weight_scheme(plan.weights, plan.window_len)
            needs_model = STRATEGY_DEEPORDER in plan.strategies
            if needs_model:
                model, training = train_model(train_cycles, plan)
            state = ReplayState.from_cycles(train_cycles, plan.window_len, cut)
            trained_through = cut

        for cycle in eval_cycles:
            if (
                needs_model
                and plan.retrain_every
                and cycle.cycle_id - trained_through >= plan.retrain_every
            ):
                with timer.phase(PHASE_PROCESS):
                    history = [c for c in cycles if c.cycle_id < cycle.cycle_id]
                    model, training = train_model(history, plan)
                    trained_through = cycle.cycle_id

            ids = [rec.test_id for rec in cycle.records]
            failed = {rec.test_id: rec.failed for rec in cycle.records}
            actual_dur = {rec.test_id: rec.duration_s for rec in cycle.records}
            n_faults = sum(failed.values())
            budget_s = plan.budget_fraction * sum(actual_dur.values())

            with timer.phase(PHASE_PRIORITIZE):
                state.advance_to(cycle.cycle_id - 1)
                matrix = state.matrix_for(ids)
                mean_dur = dict(zip(matrix.test_ids, matrix.mean_duration_s.tolist()))
                suites: dict[str, PrioritizedSuite | None] = {}
                for strategy in plan.strategies:
                    if strategy == STRATEGY_RANDOM:
                        suites[strategy] = None
                    else:
                        suites[strategy] = _strategy_suite(
                            strategy, ids, matrix, mean_dur, model, scheme
                        )

            base = {
                "dataset": dataset_name,
                "cycle": cycle.cycle_id,
                "n_tests": len(ids),
                "n_faults": n_faults,
                "budget_s": budget_s,
            }
            for strategy in plan.strategies:
                if strategy == STRATEGY_RANDOM:
                    reps = []
                    for rep in range(plan.random_repeats):
                        rng = np.random.default_rng([plan.seed, cycle.cycle_id, rep])
                        perm = [ids[i] for i in rng.permutation(len(ids))]
                        suite = PrioritizedSuite(
                            tuple(RankedTest(t, 0.0, mean_dur[t]) for t in perm)
                        )
                        reps.append(_evaluate_order(suite, failed, actual_dur,
                                                    n_faults, budget_s))
                    merged = {
                        key: _mean_or_none([r[key] for r in reps]) for key in reps[0]
                    }
                    rows.append({**base, "strategy": strategy, **merged})
                else:
                    rows.append({
                        **base,
                        "strategy": strategy,
                        **_evaluate_order(suites[strategy], failed, actual_dur,
                                          n_faults, budget_s),
                    })

            with timer.phase(PHASE_PROCESS):
                state.ingest(cycle)
                if needs_model:
                    matrix_now = state.matrix_for(ids)
                    labeled = label_dataset(matrix_now, scheme, bounds=model.bounds)
                    X, y, _ = stack(labeled)
                    holdout_preds.extend(predict(model.net, X).tolist())
                    holdout_labels.extend(y.tolist())

    holdout = None
    holdout_pairs = None
    if holdout_preds:
        holdout_pairs = (np.array(holdout_preds), np.array(holdout_labels))
        holdout = regression_accuracy(*holdout_pairs)

    aggregates = aggregate_rows(rows, plan.strategies)
    phases = phase_totals(timer.events)
    result = PipelineResult(
        plan=plan,
        cut_cycle=cut,
        per_cycle=rows,
        aggregates=aggregates,
        timings=stopwatch_metrics(timer.events),
        phases=phases,
        model=model,
        training=training,
        holdout=holdout,
        holdout_pairs=holdout_pairs,
    )
    if plan.out_dir is not None:
        _write_artifacts(result, Path(plan.out_dir))
    return result


def aggregate_rows(rows: list[dict], strategies: Sequence[str]) -> list[dict]:
    """Per-strategy means over fault-containing cycles."""
    out = []
    for strategy in strategies:
        mine = [r for r in rows if r["strategy"] == strategy]
        faulty = [r for r in mine if r["n_faults"] > 0]
        out.append({
            "strategy": strategy,
            "cycles": len(mine),
            "fault_cycles": len(faulty),
            "mean_apfd": _mean_or_none([r["apfd"] for r in faulty]),
            "mean_napfd": _mean_or_none([r["napfd"] for r in faulty]),
            "mean_ft_s": _mean_or_none([r["ft_s"] for r in faulty]),
            "mean_lt_s": _mean_or_none([r["lt_s"] for r in faulty]),
            "mean_at_s": _mean_or_none([r["at_s"] for r in faulty]),
        })
    return out


PER_CYCLE_COLUMNS = [
    "dataset", "cycle", "strategy", "n_tests", "n_faults", "apfd", "napfd",
    "ft_s", "lt_s", "at_s", "n_selected", "detected", "budget_s", "used_s",
]
AGGREGATE_COLUMNS = [
    "strategy", "cycles", "fault_cycles", "mean_apfd", "mean_napfd",
    "mean_ft_s", "mean_lt_s", "mean_at_s",
]


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row.get(c) is None else row.get(c) for c in columns])


def _write_artifacts(result: PipelineResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = result.paths
    paths["per_cycle"] = out_dir / "per_cycle.csv"
    write_csv(paths["per_cycle"], PER_CYCLE_COLUMNS, result.per_cycle)
    paths["per_cycle_txt"] = out_dir / "per_cycle.txt"
    paths["per_cycle_txt"].write_text(
        format_table(PER_CYCLE_COLUMNS,
                     [[r.get(c) for c in PER_CYCLE_COLUMNS] for r in result.per_cycle])
        + "\n",
        encoding="utf-8",
    )
    paths["aggregate"] = out_dir / "aggregate.csv"
    write_csv(paths["aggregate"], AGGREGATE_COLUMNS, result.aggregates)
    paths["aggregate_txt"] = out_dir / "aggregate.txt"
    table = format_table(
        AGGREGATE_COLUMNS,
        [[a[c] for c in AGGREGATE_COLUMNS] for a in result.aggregates],
    )
    paths["aggregate_txt"].write_text(table + "\n", encoding="utf-8")
    paths["timings"] = out_dir / "timings.csv"
    timing_rows = [{"phase": k, "seconds": v} for k, v in sorted(result.phases.items())]
    timing_rows += [{"phase": k, "seconds": v} for k, v in result.timings.items()]
    write_csv(paths["timings"], ["phase", "seconds"], timing_rows)
    if result.model is not None:
        paths["model"] = out_dir / "model.txt"
        save_model(result.model, paths["model"])
    if result.training is not None:
        paths["training_log"] = out_dir / "training_log.csv"
        write_csv(
            paths["training_log"],
            ["epoch", "mse"],
            [{"epoch": i + 1, "mse": repr(m)} for i, m in enumerate(result.training.epoch_mse)],
        )
    if result.holdout is not None:
        paths["holdout"] = out_dir / "holdout.csv"
        write_csv(
            paths["holdout"],
            ["mse", "r_squared", "residual_std"],
            [{
                "mse": repr(result.holdout.mse),
                "r_squared": "" if result.holdout.r_squared is None
                else repr(result.holdout.r_squared),
                "residual_std": repr(result.holdout.residual_std),
            }],
        )


# --- history-length study ----------------------------------------------------

@dataclass
class StudyResult:
    windows: tuple[int, int]
    rows: list[dict]  # one per window: aggregates of the learned strategy
    delta_apfd: float | None
    delta_napfd: float | None
    results: dict[int, PipelineResult]


def history_length_study(plan: ExperimentPlan, windows: tuple[int, int] = (4, 10)
                         ) -> StudyResult:
    """Train one model per window length, replay identically, compare."""
    cycles = _load_cycles(plan)
    if len(cycles) <= max(windows):
        raise InsufficientHistory(
            f"dataset has {len(cycles)} cycles; need more than {max(windows)}"
        )
    results: dict[int, PipelineResult] = {}
    for w in dict.fromkeys(windows):  # deduplicate, keep order
        sub = replace(
            plan,
            dataset=cycles,
            window_len=w,
            strategies=(STRATEGY_DEEPORDER,),
            out_dir=None,
            name=plan.dataset_name(),
        )
        results[w] = run_pipeline(sub)

    rows = []
    for w in windows:
        agg = results[w].aggregates[0]
        rows.append({
            "dataset": plan.dataset_name(),
            "window": w,
            "mean_apfd": agg["mean_apfd"],
            "mean_napfd": agg["mean_napfd"],
        })
    a, b = rows[0], rows[1]
    delta_apfd = (
        None if a["mean_apfd"] is None or b["mean_apfd"] is None
        else b["mean_apfd"] - a["mean_apfd"]
    )
    delta_napfd = (
        None if a["mean_napfd"] is None or b["mean_napfd"] is None
        else b["mean_napfd"] - a["mean_napfd"]
    )
    study = StudyResult(tuple(windows), rows, delta_apfd, delta_napfd, results)
    if plan.out_dir is not None:
        out_dir = Path(plan.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_csv(out_dir / "history_study.csv",
                  ["dataset", "window", "mean_apfd", "mean_napfd"], rows)
    return study


# --- ground-truth comparison ---------------------------------------------------

@dataclass
class GroundTruthReport:
    rows: list[dict]
    rocket_mean: float
    rocket_max: float
    model_mean: float | None
    model_max: float | None


def compare_against_ground_truth(
    plan: ExperimentPlan,
    model: SavedModel | None = None,
    prio_column: str = "CalcPrio",
) -> GroundTruthReport:
    """Per-test |actual - computed| for the history-weighted rule and,
    when a model is given, for its predictions."""
    if isinstance(plan.dataset, (str, Path)):
        schema = ColumnMapping(prio=prio_column)
        cycles = ingest_csv(plan.dataset, schema=schema)
    else:
        cycles = list(plan.dataset)

    actual: dict = {}
    for cycle in cycles:
        for rec in cycle.records:
            if rec.prio is not None:
                actual[rec.test_id] = rec.prio  # later cycles overwrite
    if not actual:
        raise MissingPriorityColumn(
            f"dataset carries no usable {prio_column!r} values"
        )

    window = model.window_len if model is not None else plan.window_len
    matrix = build_status_matrix(cycles, window, include_tests=list(actual))
    scheme = weight_scheme(plan.weights, window)
    rocket_prios = priorities(matrix.statuses, scheme)
    preds = None
    if model is not None:
        X, _, _ = stack(extract(matrix, bounds=model.bounds, expected_window=window))
        preds = np.clip(predict(model.net, X), 0.0, 1.0)

    rows = []
    for i, tid in enumerate(matrix.test_ids):
        if tid not in actual:
            continue
        row = {
            "test_id": tid,
            "actual": actual[tid],
            "rocket": float(rocket_prios[i]),
            "rocket_diff": abs(actual[tid] - float(rocket_prios[i])),
        }
        if preds is not None:
            row["model"] = float(preds[i])
            row["model_diff"] = abs(actual[tid] - float(preds[i]))
        rows.append(row)

    rocket_diffs = [r["rocket_diff"] for r in rows]
    model_diffs = [r["model_diff"] for r in rows] if preds is not None else None
    report = GroundTruthReport(
        rows=rows,
        rocket_mean=float(np.mean(rocket_diffs)),
        rocket_max=float(np.max(rocket_diffs)),
        model_mean=float(np.mean(model_diffs)) if model_diffs else None,
        model_max=float(np.max(model_diffs)) if model_diffs else None,
    )
    if plan.out_dir is not None:
        out_dir = Path(plan.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        columns = ["test_id", "actual", "rocket", "rocket_diff"]
        if preds is not None:
            columns += ["model", "model_diff"]
        write_csv(out_dir / "ground_truth.csv", columns, rows)
    return report
