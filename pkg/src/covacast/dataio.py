"""CSV ingestion into the time-series model.

Expects a header row, ISO-8601 timestamps, and plain decimal values (no locale
separators). Rows are sorted by timestamp; daily/weekly/monthly stamps are
normalized to UTC midnight; frequency gaps are fatal.
"""
from __future__ import annotations

import csv
import logging
from datetime import datetime, timezone

from .config import DatasetConfig
from .covariates import CovariateEntry, CovariateSeries
from .errors import MissingColumn, NonNumericValue, UnparseableTimestamp
from .series import Frequency, TimePoint, TimeSeries

logger = logging.getLogger(__name__)


def parse_timestamp(text: str) -> datetime:
    raw = text.strip()
    if raw.endswith(("Z", "z")):  # fromisoformat rejects the Z suffix before 3.11
        raw = raw[:-1] + "+00:00"
    ts = None
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError:
        try:
            ts = datetime.strptime(raw, "%Y-%m")
        except ValueError:
            raise UnparseableTimestamp(f"cannot parse timestamp {text!r}") from None
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


def load_dataset(cfg: DatasetConfig) -> tuple[TimeSeries, list[CovariateSeries]]:
    """Load a CSV into a TimeSeries plus any extra covariate columns, verbatim."""
    with open(cfg.path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        needed = [cfg.timestamp_column, cfg.value_column, *cfg.extra_covariate_columns]
        missing = [c for c in needed if c not in header]
        if missing:
            raise MissingColumn(f"columns {missing} not in header {header}")

        rows = []
        for i, row in enumerate(reader, start=2):  # header is line 1
            raw_ts = row.get(cfg.timestamp_column) or ""
            try:
                ts = parse_timestamp(raw_ts)
            except UnparseableTimestamp as exc:
                raise UnparseableTimestamp(f"row {i}: {exc}") from None
            raw_value = (row.get(cfg.value_column) or "").strip()
            try:
                value = float(raw_value)
            except ValueError:
                raise NonNumericValue(f"row {i}: value {raw_value!r} is not numeric") from None
            extras = {c: (row.get(c) or "").strip() for c in cfg.extra_covariate_columns}
            rows.append((ts, value, extras))

    if not rows:
        raise NonNumericValue(f"{cfg.path} holds no data rows")
    rows.sort(key=lambda r: r[0])

    frequency = cfg.frequency
    if cfg.pre_aggregation == "daily_total":
        rows = _aggregate_daily(rows, cfg)
        frequency = Frequency.DAILY

    if frequency in (Frequency.DAILY, Frequency.WEEKLY, Frequency.MONTHLY):
        rows = [(ts.replace(hour=0, minute=0, second=0, microsecond=0), v, e) for ts, v, e in rows]

    series = TimeSeries(
        tuple(TimePoint(ts, value) for ts, value, _ in rows),
        frequency,
    )

    extras: list[CovariateSeries] = []
    if cfg.pre_aggregation != "daily_total":
        for column in cfg.extra_covariate_columns:
            entries = tuple(CovariateEntry(ts, extra[column]) for ts, _, extra in rows)
            extras.append(CovariateSeries(kind=column, entries=entries, horizon_count=0))
    return series, extras


def _aggregate_daily(rows, cfg: DatasetConfig):
    """Sum same-day rows into daily totals (intra-day extras are dropped)."""
    if cfg.extra_covariate_columns:
        logger.warning("daily_total aggregation drops extra covariate columns")
    totals: dict = {}
    for ts, value, _ in rows:
        day = datetime(ts.year, ts.month, ts.day)
        totals[day] = totals.get(day, 0.0) + value
    return [(day, totals[day], {}) for day in sorted(totals)]
