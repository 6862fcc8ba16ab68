"""End-to-end experiment orchestration.

Stage order per horizon: validation cells for every (format, covariate) combo,
validation-based selection, test cells for the selected pair plus configured
comparators, classical baselines, replication with pairwise Welch t-tests, and
censoring sweeps. Everything lands in one JSONL run log whose first record is
the resolved config snapshot; offline runs replay bit-identically from it.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .backends import make_backend
from .config import SELECTED, ExperimentConfig
from .dataio import load_dataset
from .errors import CovacastError, EmptyRecordSet
from .experiment import (
    TEST,
    VALIDATION,
    CellKey,
    RunRecord,
    censoring_sweep,
    derive_seed,
    evaluate_baseline,
    evaluate_cell,
    render_cell_prompts,
    replicate_cell,
    select_best,
    welch_t_test,
)
from .prompts import PromptFormat
from .runlog import RunLog
from .series import split_series

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


@dataclass
class RunResult:
    status: int
    log_path: Path
    records: list[RunRecord] = field(default_factory=list)
    prompts_rendered: int = 0


def _pair_space(config: ExperimentConfig):
    """All (format, covariate) combinations the validation stage evaluates."""
    pairs = []
    for fmt in config.formats:
        if fmt is PromptFormat.NO_COVARIATE:
            pairs.append((fmt, None))
        elif fmt is PromptFormat.PROMPT_CAST and not config.covariate_kinds:
            pairs.append((fmt, None))
        else:
            for kind in config.covariate_kinds:
                pairs.append((fmt, kind))
    return pairs


def _resolve_comparators(config: ExperimentConfig, selected_kind):
    out = []
    for fmt, cov in config.comparators:
        if cov == SELECTED:
            if selected_kind is None:
                logger.warning("comparator %s skipped: no selected covariate", fmt.value)
                continue
            cov = selected_kind
        out.append((fmt, cov))
    return out


def run_experiment(config: ExperimentConfig, *, dry_run: bool = False) -> RunResult:
    config.validate()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log = RunLog(out_dir / "runlog.jsonl", seed=config.seed)
    result = RunResult(status=EXIT_OK, log_path=log.path)
    failures = 0

    try:
        log.append("config", config=config.to_dict(), dry_run=dry_run)
        series, extras = load_dataset(config.dataset)
        training, validation, test = split_series(series, config.splits)
        log.append(
            "dataset",
            n_points=len(series),
            start=series.start.isoformat(),
            end=series.end.isoformat(),
            training_points=len(training),
            validation_points=len(validation),
            test_points=len(test),
            extra_covariates=[str(c.kind) for c in extras],
        )
        backend = make_backend(config.backend, seed=derive_seed(config.seed, "backend"))
        ds = config.dataset.dataset_id
        cell_options = dict(
            knowledge_text=config.knowledge_text,
            stride=config.stride,
            max_history=config.max_history,
            censor_scope=config.censoring_scope,
        )
        ranges = {VALIDATION: config.splits.validation_range, TEST: config.splits.test_range}

        def log_record(rec: RunRecord) -> None:
            log.append("run_record", **rec.to_dict())
            result.records.append(rec)

        def log_event(event: dict) -> None:
            log.append(event.pop("kind"), **event)

        def run_cells(keys):
            """Evaluate cells (parallel up to backend limit), log in key order."""
            ordered = sorted(keys, key=CellKey.sort_key)

            def one(key: CellKey):
                events: list[dict] = []
                seed = derive_seed(config.seed, *key.seed_parts())
                try:
                    rec = evaluate_cell(
                        key,
                        series,
                        ranges[key.split],
                        backend,
                        seed=seed,
                        on_event=events.append,
                        **cell_options,
                    )
                    return key, rec, events, None
                except CovacastError as exc:
                    return key, None, events, exc

            if backend.parallelism > 1 and len(ordered) > 1:
                with ThreadPoolExecutor(max_workers=backend.parallelism) as pool:
                    outcomes = list(pool.map(one, ordered))
            else:
                outcomes = [one(k) for k in ordered]

            records = []
            nonlocal failures
            for key, rec, events, exc in outcomes:
                for event in events:
                    log.append(event.pop("kind"), **event)
                if exc is not None:
                    failures += 1
                    log.append(
                        "cell_failure",
                        key=key.to_dict(),
                        error=type(exc).__name__,
                        message=str(exc),
                    )
                    continue
                log_record(rec)
                records.append(rec)
            return records

        for horizon in config.horizons:
            val_keys = [
                CellKey(ds, horizon, fmt, kind, VALIDATION) for fmt, kind in _pair_space(config)
            ]

            if dry_run:
                for key in sorted(val_keys, key=CellKey.sort_key):
                    seed = derive_seed(config.seed, *key.seed_parts())
                    try:
                        for i, _task, prompt in render_cell_prompts(
                            key, series, ranges[VALIDATION], seed=seed, **cell_options
                        ):
                            log.append(
                                "prompt",
                                cell=key.to_dict(),
                                task_index=i,
                                text=prompt.text,
                                token_estimate=prompt.token_estimate,
                            )
                            result.prompts_rendered += 1
                    except CovacastError as exc:
                        failures += 1
                        log.append(
                            "cell_failure",
                            key=key.to_dict(),
                            error=type(exc).__name__,
                            message=str(exc),
                        )
                continue

            val_records = run_cells(val_keys)

            # --- selection on the validation split
            candidates = [r for r in val_records if r.key.covariate_kind is not None]
            selected = None
            if candidates:
                try:
                    sel_fmt, sel_kind = select_best(candidates, config.selection_criterion)
                    selected = (sel_fmt, sel_kind)
                    log.append(
                        "selection",
                        horizon=horizon,
                        criterion=config.selection_criterion,
                        format=sel_fmt.value,
                        covariate_kind=sel_kind.value if sel_kind else None,
                    )
                except EmptyRecordSet:
                    pass
            if selected is None:
                log.append("note", message=f"horizon {horizon}: no covariate pair to select")

            # --- test split: selected pair plus comparators
            comparators = _resolve_comparators(config, selected[1] if selected else None)
            test_pairs = ([selected] if selected else []) + [
                c for c in comparators if c != selected
            ]
            test_keys = [CellKey(ds, horizon, fmt, kind, TEST) for fmt, kind in test_pairs]
            run_cells(test_keys)

            # --- classical baselines on both splits
            for spec in config.baselines:
                for split in (VALIDATION, TEST):
                    params = {"stride": config.stride, "max_history": config.max_history}
                    if spec.kind == "seasonal_naive":
                        params["period"] = spec.period or config.default_period()
                    else:
                        dp, dd = config.default_ar_order()
                        params["p"] = spec.p if spec.p is not None else dp
                        params["d"] = spec.d if spec.d is not None else dd
                    try:
                        report, points = evaluate_baseline(
                            spec.kind, series, ranges[split], horizon, **params
                        )
                    except CovacastError as exc:
                        failures += 1
                        log.append(
                            "cell_failure",
                            key={"baseline": spec.kind, "horizon": horizon, "split": split},
                            error=type(exc).__name__,
                            message=str(exc),
                        )
                        continue
                    slug = f"{ds}_h{horizon}_{split}_baseline-{spec.kind}"
                    log.append(
                        "baseline_record",
                        dataset_id=ds,
                        horizon=horizon,
                        split=split,
                        model=spec.kind,
                        params={k: v for k, v in params.items() if v is not None},
                        report=report.to_dict(),
                    )
                    log.append(
                        "forecast_points",
                        slug=slug,
                        label=f"{spec.kind} [{split}, h={horizon}]",
                        **points,
                    )

            # --- replication + pairwise t-tests
            if config.replications >= 2 and selected is not None and comparators:
                rep_backend = backend.with_temperature(config.replication_temperature)
                for split in (VALIDATION, TEST):
                    samples = {}
                    for fmt, kind in [selected] + [c for c in comparators if c != selected]:
                        key = CellKey(ds, horizon, fmt, kind, split)
                        base = derive_seed(config.seed, "replication", *key.seed_parts())
                        try:
                            samples[(fmt, kind)] = replicate_cell(
                                key,
                                config.replications,
                                rep_backend,
                                base,
                                series,
                                ranges[split],
                                on_record=log_record,
                                **cell_options,
                            )
                        except CovacastError as exc:
                            failures += 1
                            log.append(
                                "cell_failure",
                                key=key.to_dict(),
                                error=type(exc).__name__,
                                message=str(exc),
                            )
                    if selected not in samples:
                        continue
                    best_reports = samples[selected]
                    for other, other_reports in samples.items():
                        if other == selected:
                            continue
                        for metric in ("rmse", "mae", "mape"):
                            a = [r.metric(metric) for r in best_reports]
                            b = [r.metric(metric) for r in other_reports]
                            if any(v is None for v in a + b):
                                log.append(
                                    "note",
                                    message=f"{metric} undefined in replications; t-test skipped",
                                )
                                continue
                            res = welch_t_test(a, b)
                            log.append(
                                "p_value",
                                dataset_id=ds,
                                horizon=horizon,
                                split=split,
                                metric=metric,
                                best={
                                    "format": selected[0].value,
                                    "covariate": selected[1].value if selected[1] else None,
                                },
                                other={
                                    "format": other[0].value,
                                    "covariate": other[1].value if other[1] else None,
                                },
                                t=res.t,
                                df=res.df,
                                p=res.p_two_sided,
                                degenerate=res.degenerate,
                                n=config.replications,
                            )

            # --- censoring sweep over the selected pair
            if config.censoring_levels and selected is not None and selected[1] is not None:
                for split in (VALIDATION, TEST):
                    key = CellKey(ds, horizon, selected[0], selected[1], split)
                    try:
                        censoring_sweep(
                            key,
                            config.censoring_levels,
                            backend,
                            config.censoring_seeds,
                            series,
                            ranges[split],
                            on_record=log_record,
                            on_event=log_event,
                            **cell_options,
                        )
                    except CovacastError as exc:
                        failures += 1
                        log.append(
                            "cell_failure",
                            key=key.to_dict(),
                            error=type(exc).__name__,
                            message=str(exc),
                        )

        result.status = EXIT_PARTIAL if failures else EXIT_OK
        log.append(
            "summary",
            status=result.status,
            run_records=len(result.records),
            cell_failures=failures,
            prompts_rendered=result.prompts_rendered,
        )
    finally:
        log.close()
    return result


def replay_from_log(log_path, output_dir=None) -> RunResult:
    """Re-run the experiment captured by a run log's config snapshot."""
    records = RunLog.read(log_path)
    if not records or records[0].get("kind") != "config":
        raise CovacastError(f"{log_path} does not start with a config snapshot")
    snapshot = dict(records[0]["config"])
    if output_dir is not None:
        snapshot["output_dir"] = str(output_dir)
    config = ExperimentConfig.from_dict(snapshot)
    return run_experiment(config)
