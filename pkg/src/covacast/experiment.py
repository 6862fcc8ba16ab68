"""Evaluation cells, validation-based selection, replication, and censoring sweeps.

A cell is one table entry: (dataset, horizon, format, covariate, split,
censoring level, replication). Offline runs are deterministic: every random
choice derives its seed from the run seed and the cell identity, never from
wall clock or iteration order.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, replace

from .baselines import ar_forecast, fit_ar, seasonal_naive_forecast
from .covariates import CovariateKind, censor_covariates, derive_covariate
from .errors import AllTasksFailed, EmptyRecordSet, ParseError, RatioOutOfRange, SampleTooSmall
from .metrics import MetricReport, compute_metrics
from .parsing import parse_forecast
from .prompts import PromptFormat, PromptSpec, render_prompt
from .series import TimeSeries, rolling_origins
from .stats import TTestResult, welch_t_test  # noqa: F401  (re-exported)

VALIDATION = "validation"
TEST = "test"
SELECTION_CRITERIA = ("rmse", "mae", "mape")


def derive_seed(base: int, *parts) -> int:
    """Stable 64-bit seed from a base seed and hashable identity parts."""
    payload = repr((int(base),) + tuple(parts)).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


@dataclass(frozen=True)
class CellKey:
    dataset_id: str
    horizon: int
    format: PromptFormat
    covariate_kind: CovariateKind | None
    split: str
    censoring_level: float = 0.0
    replication: int = 0

    def __post_init__(self):
        if self.split not in (VALIDATION, TEST):
            raise ValueError(f"split must be {VALIDATION!r} or {TEST!r}")
        if not 0.0 <= self.censoring_level <= 1.0:
            raise ValueError("censoring_level must lie in [0, 1]")
        if self.replication < 0:
            raise ValueError("replication must be nonnegative")

    @property
    def covariate_name(self) -> str:
        return self.covariate_kind.value if self.covariate_kind else ""

    def sort_key(self):
        return (
            self.dataset_id,
            self.horizon,
            self.split,
            self.format.value,
            self.covariate_name,
            self.censoring_level,
            self.replication,
        )

    def seed_parts(self):
        return (
            self.dataset_id,
            self.split,
            self.horizon,
            self.format.value,
            self.covariate_name,
            repr(self.censoring_level),
            self.replication,
        )

    def slug(self) -> str:
        bits = [
            self.dataset_id,
            f"h{self.horizon}",
            self.split,
            self.format.value,
            self.covariate_name or "none",
        ]
        if self.censoring_level:
            bits.append(f"c{self.censoring_level:g}")
        if self.replication:
            bits.append(f"r{self.replication}")
        return "_".join(bits).replace("/", "-").replace(" ", "-")

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "horizon": self.horizon,
            "format": self.format.value,
            "covariate_kind": self.covariate_kind.value if self.covariate_kind else None,
            "split": self.split,
            "censoring_level": self.censoring_level,
            "replication": self.replication,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellKey":
        kind = d.get("covariate_kind")
        return cls(
            dataset_id=d["dataset_id"],
            horizon=d["horizon"],
            format=PromptFormat.parse(d["format"]),
            covariate_kind=CovariateKind.parse(kind) if kind else None,
            split=d["split"],
            censoring_level=d.get("censoring_level", 0.0),
            replication=d.get("replication", 0),
        )


@dataclass(frozen=True)
class RunRecord:
    key: CellKey
    report: MetricReport
    seed: int
    backend_id: str
    parse_failures: int
    wall_time_seconds: float
    token_totals: tuple[int, int]  # (prompt, completion)

    def to_dict(self) -> dict:
        return {
            "key": self.key.to_dict(),
            "report": self.report.to_dict(),
            "cell_seed": self.seed,
            "backend_id": self.backend_id,
            "parse_failures": self.parse_failures,
            "wall_time_seconds": self.wall_time_seconds,
            "token_totals": {"prompt": self.token_totals[0], "completion": self.token_totals[1]},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            key=CellKey.from_dict(d["key"]),
            report=MetricReport.from_dict(d["report"]),
            seed=d["cell_seed"],
            backend_id=d["backend_id"],
            parse_failures=d["parse_failures"],
            wall_time_seconds=d["wall_time_seconds"],
            token_totals=(d["token_totals"]["prompt"], d["token_totals"]["completion"]),
        )


def render_cell_prompts(
    key: CellKey,
    series: TimeSeries,
    eval_range,
    *,
    seed: int,
    knowledge_text: str | None = None,
    stride: int | None = None,
    max_history: int | None = None,
    censor_scope: str = "both",
):
    """Yield (task_index, task, prompt) for every task of the cell.

    Dry runs share this path with live evaluation, so rendered prompts are
    identical either way for the same seed.
    """
    tasks = rolling_origins(
        series, eval_range, key.horizon, stride or key.horizon, max_history=max_history
    )
    spec = PromptSpec(
        format=key.format,
        covariate_kind=key.covariate_kind,
        knowledge_text=knowledge_text,
    )
    for i, task in enumerate(tasks):
        cov = None
        if key.covariate_kind is not None:
            stamps = task.history.timestamps + task.future_timestamps
            cov = derive_covariate(stamps, key.covariate_kind, horizon_count=key.horizon)
            if key.censoring_level > 0.0:
                cov = censor_covariates(
                    cov, key.censoring_level, derive_seed(seed, "censor", i), scope=censor_scope
                )
            task = task.with_future_covariates(e.rendered for e in cov.future_entries)
        yield i, task, render_prompt(spec, task, cov)


def evaluate_cell(
    key: CellKey,
    series: TimeSeries,
    eval_range,
    backend,
    *,
    seed: int,
    knowledge_text: str | None = None,
    stride: int | None = None,
    max_history: int | None = None,
    censor_scope: str = "both",
    parse_retry: bool = True,
    emit_points: bool = True,
    on_event=None,
) -> RunRecord:
    """Run one cell end to end: tasks, prompts, completions, parsing, metrics.

    A reply that fails to parse is retried once with a fresh completion; a
    second failure excludes the task from metrics and is counted and logged.
    """
    started = time.monotonic()

    def emit(event: dict) -> None:
        if on_event is not None:
            on_event(event)

    preds: list[float] = []
    truths: list[float] = []
    stamps: list = []
    parse_failures = 0
    prompt_tokens = 0
    completion_tokens = 0
    n_tasks = 0

    for i, task, prompt in render_cell_prompts(
        key,
        series,
        eval_range,
        seed=seed,
        knowledge_text=knowledge_text,
        stride=stride,
        max_history=max_history,
        censor_scope=censor_scope,
    ):
        n_tasks += 1
        parsed = None
        failure = None
        attempts = (1, 2) if parse_retry else (1,)
        for attempt in attempts:
            result = backend.complete(prompt)
            prompt_tokens += result.prompt_tokens
            completion_tokens += result.completion_tokens
            emit(
                {
                    "kind": "completion",
                    "cell": key.to_dict(),
                    "task_index": i,
                    "origin": task.origin.isoformat(),
                    "prompt": prompt.text,
                    "reply": result.text,
                    "latency_seconds": result.latency_seconds,
                    "prompt_tokens": result.prompt_tokens,
                    "completion_tokens": result.completion_tokens,
                    "attempt": attempt,
                }
            )
            try:
                parsed = parse_forecast(result.text, key.horizon)
                break
            except ParseError as exc:
                failure = (result.text, exc)
        if parsed is None:
            parse_failures += 1
            emit(
                {
                    "kind": "parse_failure",
                    "cell": key.to_dict(),
                    "task_index": i,
                    "reply": failure[0],
                    "error": f"{type(failure[1]).__name__}: {failure[1]}",
                }
            )
            continue
        preds.extend(parsed.values)
        truths.extend(task.truth)
        stamps.extend(task.future_timestamps)

    if not preds:
        raise AllTasksFailed(f"all {n_tasks} tasks failed to parse for cell {key.slug()}")

    report = compute_metrics(preds, truths)
    assert report.n_points + key.horizon * parse_failures == n_tasks * key.horizon
    if emit_points:
        emit(
            {
                "kind": "forecast_points",
                "cell": key.to_dict(),
                "slug": key.slug(),
                "label": _cell_label(key),
                "timestamps": [t.isoformat() for t in stamps],
                "truth": truths,
                "forecast": preds,
            }
        )
    return RunRecord(
        key=key,
        report=report,
        seed=seed,
        backend_id=backend.backend_id,
        parse_failures=parse_failures,
        wall_time_seconds=time.monotonic() - started,
        token_totals=(prompt_tokens, completion_tokens),
    )


def _cell_label(key: CellKey) -> str:
    label = key.format.display_name
    if key.covariate_kind:
        label += f" / {key.covariate_kind.display_name}"
    if key.censoring_level:
        label += f" (censoring {key.censoring_level:g})"
    return f"{label} [{key.split}, h={key.horizon}]"


def select_best(records, criterion: str = "rmse"):
    """Return the (format, covariate) pair minimizing `criterion` on validation.

    Ties break by lower MAE, then format name, then covariate name. All records
    must share one dataset and horizon and be uncensored validation runs.
    """
    records = list(records)
    if not records:
        raise EmptyRecordSet("no records to select from")
    if criterion not in SELECTION_CRITERIA:
        raise ValueError(f"criterion must be one of {SELECTION_CRITERIA}")
    datasets = {r.key.dataset_id for r in records}
    horizons = {r.key.horizon for r in records}
    if len(datasets) > 1 or len(horizons) > 1:
        raise ValueError("selection records must share one dataset and horizon")
    for r in records:
        if r.key.split != VALIDATION or r.key.censoring_level != 0.0 or r.key.replication != 0:
            raise ValueError("selection expects uncensored replication-0 validation records")

    def rank(record: RunRecord):
        value = record.report.metric(criterion)
        if value is None:  # undefined MAPE never wins
            value = float("inf")
        return (value, record.report.mae, record.key.format.value, record.key.covariate_name)

    best = min(records, key=rank)
    return best.key.format, best.key.covariate_kind


def replicate_cell(
    key: CellKey,
    n_replications: int,
    backend,
    base_seed: int,
    series: TimeSeries,
    eval_range,
    *,
    on_record=None,
    on_event=None,
    **cell_options,
) -> list[MetricReport]:
    """Evaluate the cell n times, reseeding backend noise and censoring masks
    per replication; deterministic offline for a given base seed."""
    if n_replications < 2:
        raise SampleTooSmall("replication needs at least two runs")
    reports = []
    for r in range(n_replications):
        rep_seed = derive_seed(base_seed, "replication", r)
        backend.reseed(rep_seed)
        record = evaluate_cell(
            replace(key, replication=r),
            series,
            eval_range,
            backend,
            seed=rep_seed,
            emit_points=False,
            on_event=on_event,
            **cell_options,
        )
        if on_record is not None:
            on_record(record)
        reports.append(record.report)
    return reports


def censoring_sweep(
    key: CellKey,
    levels,
    backend,
    seeds,
    series: TimeSeries,
    eval_range,
    *,
    on_record=None,
    on_event=None,
    **cell_options,
) -> list[RunRecord]:
    """One evaluate_cell per (censoring level, seed); records carry the level."""
    levels = [float(v) for v in levels]
    for level in levels:
        if not 0.0 <= level <= 1.0:
            raise RatioOutOfRange(f"censoring level {level} outside [0, 1]")
    records = []
    for level in levels:
        for si, seed in enumerate(seeds):
            cell = replace(key, censoring_level=level, replication=si)
            backend.reseed(derive_seed(seed, "sweep-backend", repr(level)))
            record = evaluate_cell(
                cell,
                series,
                eval_range,
                backend,
                seed=derive_seed(seed, "sweep", repr(level)),
                on_event=on_event,
                **cell_options,
            )
            if on_record is not None:
                on_record(record)
            records.append(record)
    return records


def evaluate_baseline(
    kind: str,
    series: TimeSeries,
    eval_range,
    horizon: int,
    *,
    stride: int | None = None,
    max_history: int | None = None,
    period: int | None = None,
    p: int = 2,
    d: int = 1,
):
    """Score a classical baseline over the same rolling tasks as the LLM cells.

    Returns (MetricReport, points dict) so results flow into the same report
    and plot pipeline.
    """
    tasks = rolling_origins(series, eval_range, horizon, stride or horizon, max_history=max_history)
    preds: list[float] = []
    truths: list[float] = []
    stamps: list = []
    for task in tasks:
        if kind == "seasonal_naive":
            if period is None:
                raise ValueError("seasonal_naive needs a period")
            forecast = seasonal_naive_forecast(task.history, period, horizon)
        elif kind == "ar":
            model = fit_ar(task.history, p, d)
            forecast = ar_forecast(model, task.history, horizon)
        else:
            raise ValueError(f"unknown baseline kind {kind!r}")
        preds.extend(forecast)
        truths.extend(task.truth)
        stamps.extend(task.future_timestamps)
    report = compute_metrics(preds, truths)
    points = {
        "timestamps": [t.isoformat() for t in stamps],
        "truth": truths,
        "forecast": preds,
    }
    return report, points
