"""covacast: covariate-aware LLM time-series forecasting harness."""

from .backends import (
    Backend,
    BackendConfig,
    CompletionResult,
    LiveBackend,
    NoisyOracleBackend,
    OracleBackend,
    ScriptedBackend,
    make_backend,
    oracle_backend_complete,
)
from .baselines import ARModel, ar_forecast, fit_ar, seasonal_naive_forecast
from .config import BaselineSpec, DatasetConfig, ExperimentConfig
from .covariates import (
    CENSORED_TEXT,
    CovariateEntry,
    CovariateKind,
    CovariateSeries,
    censor_covariates,
    derive_covariate,
)
from .dataio import load_dataset
from .experiment import (
    CellKey,
    RunRecord,
    censoring_sweep,
    derive_seed,
    evaluate_baseline,
    evaluate_cell,
    replicate_cell,
    select_best,
)
from .metrics import MetricReport, compute_metrics
from .parsing import ParsedForecast, parse_forecast, render_list
from .prompts import PromptFormat, PromptSpec, PromptText, format_value, render_prompt
from .report import render_report
from .runlog import RunLog
from .runner import RunResult, replay_from_log, run_experiment
from .series import (
    ForecastTask,
    Frequency,
    SplitSpec,
    TimePoint,
    TimeSeries,
    rolling_origins,
    split_series,
    timestamps_for,
)
from .stats import TTestResult, welch_t_test

__version__ = "0.1.0"

__all__ = [
    "ARModel",
    "Backend",
    "BackendConfig",
    "BaselineSpec",
    "CENSORED_TEXT",
    "CellKey",
    "CompletionResult",
    "CovariateEntry",
    "CovariateKind",
    "CovariateSeries",
    "DatasetConfig",
    "ExperimentConfig",
    "ForecastTask",
    "Frequency",
    "LiveBackend",
    "MetricReport",
    "NoisyOracleBackend",
    "OracleBackend",
    "ParsedForecast",
    "PromptFormat",
    "PromptSpec",
    "PromptText",
    "RunLog",
    "RunRecord",
    "RunResult",
    "ScriptedBackend",
    "SplitSpec",
    "TTestResult",
    "TimePoint",
    "TimeSeries",
    "ar_forecast",
    "censor_covariates",
    "censoring_sweep",
    "compute_metrics",
    "derive_covariate",
    "derive_seed",
    "evaluate_baseline",
    "evaluate_cell",
    "fit_ar",
    "format_value",
    "load_dataset",
    "make_backend",
    "oracle_backend_complete",
    "parse_forecast",
    "render_list",
    "render_prompt",
    "render_report",
    "replay_from_log",
    "replicate_cell",
    "rolling_origins",
    "run_experiment",
    "seasonal_naive_forecast",
    "select_best",
    "split_series",
    "timestamps_for",
    "welch_t_test",
]
