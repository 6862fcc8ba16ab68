"""Command-line entry point.

Verbs: run <config>, report <runlog>, validate-config <config>,
render-prompts <config>. Exit codes: 0 success, 2 partial (logged cell
failures), 1 fatal. Precedence: flags > config file > defaults.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .config import ExperimentConfig
from .errors import ConfigError, CovacastError
from .report import render_report
from .runner import EXIT_FATAL, run_experiment


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_yaml(args.config)
    overrides = {}
    for name in ("seed", "output_dir", "replications", "backend"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if overrides:
        snapshot = config.to_dict()
        snapshot.update(overrides)
        config = ExperimentConfig.from_dict(snapshot)
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    result = run_experiment(config, dry_run=args.dry_run)
    if args.dry_run:
        print(f"dry run: {result.prompts_rendered} prompts rendered, no backend calls")
    print(f"run log: {result.log_path} ({len(result.records)} run records)")
    if result.status:
        print("status: partial (some cells failed; see cell_failure records)")
    return result.status


def _cmd_render_prompts(args) -> int:
    config = _load_config(args)
    result = run_experiment(config, dry_run=True)
    print(f"{result.prompts_rendered} prompts rendered into {result.log_path}")
    return result.status


def _cmd_report(args) -> int:
    out_dir = Path(args.out) if args.out else Path(args.runlog).parent
    text = render_report(args.runlog, style=args.style, out_dir=out_dir)
    print(text)
    print(f"report written under {out_dir}", file=sys.stderr)
    return 0


def _cmd_validate_config(args) -> int:
    config = _load_config(args)
    dataset_path = Path(config.dataset.path)
    if not dataset_path.exists():
        raise ConfigError(f"dataset file not found: {dataset_path}")
    with open(dataset_path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    needed = [
        config.dataset.timestamp_column,
        config.dataset.value_column,
        *config.dataset.extra_covariate_columns,
    ]
    missing = [c for c in needed if c not in header]
    if missing:
        raise ConfigError(f"columns {missing} not in {dataset_path} header {header}")
    print(f"OK: {args.config}")
    print(f"  dataset: {dataset_path} ({config.dataset.frequency.value})")
    print(f"  horizons: {list(config.horizons)}; formats: {[f.value for f in config.formats]}")
    print(f"  backend: {config.backend!r}; output: {config.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covacast",
        description="Covariate-aware LLM time-series forecasting harness",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the experiment described by a config file")
    run_p.add_argument("config")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--output-dir", dest="output_dir", default=None)
    run_p.add_argument("--replications", type=int, default=None)
    run_p.add_argument("--backend", default=None, help="override, e.g. oracle")
    run_p.add_argument("--dry-run", action="store_true", help="render prompts, no backend calls")
    run_p.set_defaults(func=_cmd_run)

    rep_p = sub.add_parser("report", help="render tables, plot data, and figures from a run log")
    rep_p.add_argument("runlog")
    rep_p.add_argument("--style", choices=("markdown", "csv"), default="markdown")
    rep_p.add_argument("--out", default=None, help="output directory (default: beside the log)")
    rep_p.set_defaults(func=_cmd_report)

    val_p = sub.add_parser("validate-config", help="check a config file and its dataset columns")
    val_p.add_argument("config")
    val_p.set_defaults(func=_cmd_validate_config)

    rp_p = sub.add_parser("render-prompts", help="render and log all prompts without a backend")
    rp_p.add_argument("config")
    rp_p.add_argument("--seed", type=int, default=None)
    rp_p.add_argument("--output-dir", dest="output_dir", default=None)
    rp_p.add_argument("--dry-run", action="store_true", help="implied; accepted for symmetry")
    rp_p.set_defaults(func=_cmd_render_prompts)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
    )
    try:
        return args.func(args)
    except CovacastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
