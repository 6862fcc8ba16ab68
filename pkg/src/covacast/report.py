"""Report rendering: markdown/CSV tables, per-cell plot-data files, and
static matplotlib figures, all derived from a JSONL run log."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from datetime import datetime
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .covariates import CovariateKind  # noqa: E402
from .errors import EmptyLog  # noqa: E402
from .prompts import PromptFormat  # noqa: E402
from .runlog import RunLog  # noqa: E402

P_DISPLAY_FLOOR = 1e-4
NA = "n/a"


def render_report(log, style: str = "markdown", out_dir=None) -> str:
    """Render tables from a run log (path or record list).

    With `out_dir` set, also writes report.<ext>, plots/<slug>.csv plot-data
    files, and figures/<slug>.png for every logged forecast series.
    """
    if style not in ("markdown", "csv"):
        raise ValueError("style must be 'markdown' or 'csv'")
    records = RunLog.read(log) if isinstance(log, (str, Path)) else list(log)
    run_records = [r for r in records if r.get("kind") == "run_record"]
    if not run_records:
        raise EmptyLog("log holds no run records")
    baseline_records = [r for r in records if r.get("kind") == "baseline_record"]
    p_values = [r for r in records if r.get("kind") == "p_value"]
    points = [r for r in records if r.get("kind") == "forecast_points"]

    rows = _aggregate_rows(run_records)
    if style == "markdown":
        text = _render_markdown(rows, baseline_records, p_values, run_records)
    else:
        text = _render_csv(rows, baseline_records)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        ext = "md" if style == "markdown" else "csv"
        (out / f"report.{ext}").write_text(text, encoding="utf-8")
        _write_plot_data(points, out / "plots")
        _write_figures(points, out / "figures")
        _write_censoring_figures(rows, out / "figures")
    return text


# --- aggregation ---------------------------------------------------------------


def _aggregate_rows(run_records):
    """One row per CellKey ignoring replication; replicated metrics averaged."""
    groups = defaultdict(list)
    for rec in run_records:
        key = rec["key"]
        gid = (
            key["dataset_id"],
            key["horizon"],
            key["format"],
            key["covariate_kind"] or "",
            key["censoring_level"],
            key["split"],
        )
        groups[gid].append(rec)
    rows = {}
    for gid in sorted(groups):
        dataset, horizon, fmt, cov, level, split = gid
        members = groups[gid]
        rows[gid] = {
            "dataset": dataset,
            "horizon": horizon,
            "format": fmt,
            "covariate": cov,
            "censoring_level": level,
            "split": split,
            "rmse": _mean(m["report"]["rmse"] for m in members),
            "mae": _mean(m["report"]["mae"] for m in members),
            "mape_percent": _mean_optional([m["report"]["mape_percent"] for m in members]),
            "n_points": members[0]["report"]["n_points"],
            "n_replications": len(members),
            "parse_failures": sum(m["parse_failures"] for m in members),
        }
    return rows


def _mean(values):
    values = list(values)
    return sum(values) / len(values)


def _mean_optional(values):
    present = [v for v in values if v is not None]
    return sum(present) / len(present) if present else None


# --- markdown ------------------------------------------------------------------


def _fmt_metric(value) -> str:
    return NA if value is None else f"{value:.2f}"


def _fmt_p(p: float) -> str:
    if p < P_DISPLAY_FLOOR:
        return "≤ 10^-4"
    return f"{p:.2E}"


def _display_format(fmt: str) -> str:
    try:
        return PromptFormat.parse(fmt).display_name
    except ValueError:
        return fmt


def _display_covariate(cov: str) -> str:
    if not cov:
        return "-"
    try:
        return CovariateKind.parse(cov).display_name
    except ValueError:
        return cov


def _render_markdown(rows, baseline_records, p_values, run_records) -> str:
    out = io.StringIO()
    out.write("# Forecast report\n")

    by_group = defaultdict(dict)
    for gid, row in rows.items():
        dataset, horizon, fmt, cov, level, split = gid
        by_group[(dataset, horizon)].setdefault((fmt, cov, level), {})[split] = row

    baselines = defaultdict(dict)
    for rec in baseline_records:
        baselines[(rec["dataset_id"], rec["horizon"])].setdefault(rec["model"], {})[
            rec["split"]
        ] = rec["report"]

    for dataset, horizon in sorted(by_group):
        cells = by_group[(dataset, horizon)]
        splits = sorted({s for entry in cells.values() for s in entry}, reverse=True)
        # reverse sort puts validation before test
        has_censoring = any(level > 0 for (_, _, level) in cells)

        out.write(f"\n## {dataset} - horizon {horizon}\n\n")
        header = ["Prompt", "Covariate"]
        if has_censoring:
            header.append("Censoring")
        if len(splits) == 1:
            header += ["RMSE", "MAE", "MAPE (%)"]
        else:
            for split in splits:
                title = split.capitalize()
                header += [f"{title} RMSE", f"{title} MAE", f"{title} MAPE (%)"]
        out.write("| " + " | ".join(header) + " |\n")
        out.write("|" + "|".join([" --- "] * len(header)) + "|\n")

        for fmt, cov, level in sorted(cells):
            entry = cells[(fmt, cov, level)]
            cols = [_display_format(fmt), _display_covariate(cov)]
            if has_censoring:
                cols.append(f"{level:g}")
            for split in splits:
                row = entry.get(split)
                if row is None:
                    cols += [NA, NA, NA]
                else:
                    cols += [
                        _fmt_metric(row["rmse"]),
                        _fmt_metric(row["mae"]),
                        _fmt_metric(row["mape_percent"]),
                    ]
            out.write("| " + " | ".join(cols) + " |\n")

        for model in sorted(baselines.get((dataset, horizon), {})):
            entry = baselines[(dataset, horizon)][model]
            cols = [model, "-"]
            if has_censoring:
                cols.append("0")
            for split in splits:
                rep = entry.get(split)
                if rep is None:
                    cols += [NA, NA, NA]
                else:
                    cols += [
                        _fmt_metric(rep["rmse"]),
                        _fmt_metric(rep["mae"]),
                        _fmt_metric(rep["mape_percent"]),
                    ]
            out.write("| " + " | ".join(cols) + " |\n")

    if p_values:
        out.write("\n## Pairwise t-tests\n\n")
        out.write("| Dataset | Horizon | Split | Best | Comparator | Metric | t | df | p |\n")
        out.write("|" + "|".join([" --- "] * 9) + "|\n")
        for rec in p_values:
            best = rec["best"]
            other = rec["other"]
            best_label = _display_format(best["format"])
            if best.get("covariate"):
                best_label += " / " + _display_covariate(best["covariate"])
            other_label = _display_format(other["format"])
            if other.get("covariate"):
                other_label += " / " + _display_covariate(other["covariate"])
            degenerate = " (degenerate)" if rec.get("degenerate") else ""
            out.write(
                "| {ds} | {h} | {split} | {best} | {other} | {metric} | {t:.4f} | {df:.2f} | {p}{deg} |\n".format(
                    ds=rec.get("dataset_id", ""),
                    h=rec["horizon"],
                    split=rec["split"],
                    best=best_label,
                    other=other_label,
                    metric=rec["metric"],
                    t=rec["t"],
                    df=rec["df"],
                    p=_fmt_p(rec["p"]),
                    deg=degenerate,
                )
            )

    prompt_tokens = sum(r["token_totals"]["prompt"] for r in run_records)
    completion_tokens = sum(r["token_totals"]["completion"] for r in run_records)
    out.write(
        f"\nToken totals (whitespace proxy): prompt {prompt_tokens}, "
        f"completion {completion_tokens}.\n"
    )
    return out.getvalue()


# --- csv -----------------------------------------------------------------------

CSV_COLUMNS = [
    "dataset",
    "horizon",
    "split",
    "prompt",
    "covariate",
    "censoring_level",
    "rmse",
    "mae",
    "mape_percent",
    "n_points",
    "n_replications",
    "parse_failures",
]


def _render_csv(rows, baseline_records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for gid in sorted(rows):
        row = rows[gid]
        writer.writerow(
            [
                row["dataset"],
                row["horizon"],
                row["split"],
                row["format"],
                row["covariate"],
                repr(row["censoring_level"]),
                repr(row["rmse"]),
                repr(row["mae"]),
                "" if row["mape_percent"] is None else repr(row["mape_percent"]),
                row["n_points"],
                row["n_replications"],
                row["parse_failures"],
            ]
        )
    for rec in sorted(
        baseline_records, key=lambda r: (r["dataset_id"], r["horizon"], r["split"], r["model"])
    ):
        rep = rec["report"]
        writer.writerow(
            [
                rec["dataset_id"],
                rec["horizon"],
                rec["split"],
                f"baseline:{rec['model']}",
                "",
                repr(0.0),
                repr(rep["rmse"]),
                repr(rep["mae"]),
                "" if rep["mape_percent"] is None else repr(rep["mape_percent"]),
                rep["n_points"],
                1,
                0,
            ]
        )
    return out.getvalue()


# --- plot data and figures -------------------------------------------------------


def _write_plot_data(points, plots_dir: Path) -> None:
    if not points:
        return
    plots_dir.mkdir(parents=True, exist_ok=True)
    for rec in points:
        path = plots_dir / f"{rec['slug']}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["timestamp", "truth", "forecast"])
            for ts, truth, pred in zip(rec["timestamps"], rec["truth"], rec["forecast"]):
                writer.writerow([ts, repr(truth), repr(pred)])


def _write_figures(points, fig_dir: Path) -> None:
    if not points:
        return
    fig_dir.mkdir(parents=True, exist_ok=True)
    for rec in points:
        stamps = [datetime.fromisoformat(t) for t in rec["timestamps"]]
        fig, ax = plt.subplots(figsize=(8.0, 3.2))
        ax.plot(stamps, rec["truth"], color="0.35", lw=1.5, label="truth")
        ax.plot(stamps, rec["forecast"], color="tab:red", lw=1.2, ls="--", label="forecast")
        ax.set_title(rec.get("label", rec["slug"]), fontsize=10)
        ax.legend(frameon=False, fontsize=8)
        fig.autofmt_xdate()
        fig.tight_layout()
        fig.savefig(fig_dir / f"{rec['slug']}.png", dpi=120)
        plt.close(fig)


def _write_censoring_figures(rows, fig_dir: Path) -> None:
    curves = defaultdict(list)
    for row in rows.values():
        curve_key = (row["dataset"], row["horizon"], row["split"], row["format"], row["covariate"])
        curves[curve_key].append((row["censoring_level"], row["rmse"]))
    for key, pairs in curves.items():
        levels = {p[0] for p in pairs}
        if len(levels) < 2 or max(levels) == 0:
            continue
        fig_dir.mkdir(parents=True, exist_ok=True)
        dataset, horizon, split, fmt, _cov = key
        pairs.sort()
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.plot([p[0] for p in pairs], [p[1] for p in pairs], marker="o", color="tab:blue")
        ax.set_xlabel("censoring level")
        ax.set_ylabel("RMSE")
        ax.set_title(f"{dataset} h={horizon} {split}: {_display_format(fmt)}", fontsize=10)
        fig.tight_layout()
        fig.savefig(fig_dir / f"{dataset}_h{horizon}_{split}_censoring.png", dpi=120)
        plt.close(fig)
