"""Learn test-case priorities from CI execution history, rank regression
suites, fit them into time budgets and score the orderings."""

from . import errors
from .augment import AugmentConfig, augment, gaussian_perturb, smoter_interpolate, split_bins
from .features import (
    FeatureBounds,
    FeatureVector,
    bounds_from_matrix,
    change_in_status,
    distance,
    encode_last_run,
    extract,
    normalize_duration,
)
from .history import (
    ColumnMapping,
    CycleLog,
    ExecutionRecord,
    StatusMatrix,
    Verdict,
    build_status_matrix,
    emit_csv,
    ingest_csv,
)
from .metrics import (
    CycleOutcome,
    PhaseTimer,
    RegressionAccuracy,
    TimeMetrics,
    apfd,
    napfd,
    regression_accuracy,
    stopwatch_metrics,
    time_metrics,
)
from .net import (
    AdamState,
    Network,
    SavedModel,
    TrainConfig,
    TrainResult,
    adam_step,
    backward,
    forward,
    load_model,
    mish,
    mse,
    predict,
    save_model,
    train,
    xavier_init,
)
from .pipeline import (
    ExperimentPlan,
    PipelineResult,
    compare_against_ground_truth,
    history_length_study,
    run_pipeline,
    train_model,
)
from .prioritize import (
    PrioritizedSuite,
    RankedTest,
    SelectionResult,
    rank,
    select_within_budget,
)
from .rocket import (
    WeightScheme,
    geometric_weights,
    label_dataset,
    linear_weights,
    priorities,
    priority,
    weight_scheme,
)

__version__ = "0.1.0"
