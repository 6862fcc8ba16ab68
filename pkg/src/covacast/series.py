"""Time-series data model, chronological splitting, and rolling-origin task generation.

Timestamps are naive datetimes interpreted as UTC. Daily, weekly, and monthly
data are normalized to midnight at ingest; 30-minute data keeps its time of day.
"""
from __future__ import annotations

import calendar
import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from enum import Enum

from .errors import FrequencyGap, HorizonTooLarge, OverlappingRanges, RangeOutOfBounds

logger = logging.getLogger(__name__)


class Frequency(Enum):
    WEEKLY = "weekly"
    DAILY = "daily"
    THIRTY_MINUTE = "30-minute"
    MONTHLY = "monthly"

    @classmethod
    def parse(cls, text: str) -> "Frequency":
        key = text.strip().lower().replace("_", "-")
        for member in cls:
            if key == member.value:
                return member
        if key in ("30min", "30-min", "thirty-minute"):
            return cls.THIRTY_MINUTE
        raise ValueError(f"unknown frequency {text!r}")


def _month_index(ts: datetime) -> int:
    return ts.year * 12 + ts.month - 1


def _step_ok(prev: datetime, cur: datetime, frequency: Frequency) -> bool:
    if frequency is Frequency.WEEKLY:
        return cur - prev == timedelta(days=7)
    if frequency is Frequency.DAILY:
        return cur - prev == timedelta(days=1)
    if frequency is Frequency.MONTHLY:
        return _month_index(cur) - _month_index(prev) == 1
    # 30-minute grids cover business hours only; a jump to a later day is not a gap
    return cur - prev == timedelta(minutes=30) or cur.date() > prev.date()


def next_timestamp(ts: datetime, frequency: Frequency) -> datetime:
    if frequency is Frequency.WEEKLY:
        return ts + timedelta(days=7)
    if frequency is Frequency.DAILY:
        return ts + timedelta(days=1)
    if frequency is Frequency.MONTHLY:
        idx = _month_index(ts) + 1
        year, month0 = divmod(idx, 12)
        day = min(ts.day, calendar.monthrange(year, month0 + 1)[1])
        return ts.replace(year=year, month=month0 + 1, day=day)
    return ts + timedelta(minutes=30)


def timestamps_for(start: datetime, count: int, frequency: Frequency) -> list[datetime]:
    """Generate `count` consecutive timestamps starting at `start`."""
    if count < 1:
        raise ValueError("count must be positive")
    out = [start]
    for _ in range(count - 1):
        out.append(next_timestamp(out[-1], frequency))
    return out


@dataclass(frozen=True)
class TimePoint:
    timestamp: datetime
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value at {self.timestamp.isoformat()}")


@dataclass(frozen=True)
class TimeSeries:
    """Immutable ordered series of one target variable at a declared cadence."""

    points: tuple[TimePoint, ...]
    frequency: Frequency

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("a series needs at least one point")
        for prev, cur in zip(self.points, self.points[1:]):
            if cur.timestamp <= prev.timestamp:
                raise FrequencyGap(
                    f"timestamps not strictly increasing at {cur.timestamp.isoformat()}"
                )
            if not _step_ok(prev.timestamp, cur.timestamp, self.frequency):
                raise FrequencyGap(
                    f"gap before {cur.timestamp.isoformat()} in {self.frequency.value} data"
                )

    @classmethod
    def from_values(cls, start, values, frequency: Frequency) -> "TimeSeries":
        if isinstance(start, str):
            start = datetime.fromisoformat(start)
        stamps = timestamps_for(start, len(values), frequency)
        return cls(tuple(TimePoint(t, v) for t, v in zip(stamps, values)), frequency)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def timestamps(self) -> tuple[datetime, ...]:
        return tuple(p.timestamp for p in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(p.value for p in self.points)

    @property
    def start(self) -> datetime:
        return self.points[0].timestamp

    @property
    def end(self) -> datetime:
        return self.points[-1].timestamp

    def slice(self, i: int, j: int) -> "TimeSeries":
        return TimeSeries(self.points[i:j], self.frequency)

    def first_index_at_or_after(self, ts: datetime) -> int | None:
        idx = bisect_left(self.timestamps, ts)
        return idx if idx < len(self.points) else None

    def last_index_at_or_before(self, ts: datetime) -> int | None:
        idx = bisect_right(self.timestamps, ts) - 1
        return idx if idx >= 0 else None


@dataclass(frozen=True)
class SplitSpec:
    """Inclusive validation and test timestamp ranges; validation must precede test."""

    validation_range: tuple[datetime, datetime]
    test_range: tuple[datetime, datetime]

    def __post_init__(self):
        vs, ve = self.validation_range
        ts, te = self.test_range
        if vs > ve or ts > te:
            raise RangeOutOfBounds("range start must not exceed range end")
        if vs <= te and ts <= ve:
            raise OverlappingRanges("validation and test ranges intersect")
        if ve > ts:
            raise OverlappingRanges("validation range must precede the test range")


@dataclass(frozen=True)
class ForecastTask:
    """One rolling-origin instance: history before `origin`, H held-out truths."""

    history: TimeSeries
    origin: datetime
    horizon: int
    truth: tuple[float, ...]
    future_timestamps: tuple[datetime, ...]
    future_covariates: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "truth", tuple(float(v) for v in self.truth))
        object.__setattr__(self, "future_timestamps", tuple(self.future_timestamps))
        object.__setattr__(self, "future_covariates", tuple(self.future_covariates))
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if len(self.truth) != self.horizon:
            raise ValueError("truth length must equal the horizon")
        if len(self.future_timestamps) != self.horizon:
            raise ValueError("future timestamps must cover the horizon")
        if self.future_covariates and len(self.future_covariates) != self.horizon:
            raise ValueError("future covariates must be empty or cover the horizon")
        if any(not math.isfinite(v) for v in self.truth):
            raise ValueError("truth values must be finite")
        if self.history.end >= self.origin:
            raise ValueError("history must end strictly before the origin")

    def with_future_covariates(self, values) -> "ForecastTask":
        return replace(self, future_covariates=tuple(values))


def split_series(series: TimeSeries, spec: SplitSpec):
    """Split into (training prefix, validation, test).

    The three parts partition the series from its start through the end of the
    test range; trailing points after the test range are excluded.
    """

    def locate(name, rng):
        lo, hi = rng
        if lo < series.start or hi > series.end:
            raise RangeOutOfBounds(
                f"{name} range {lo.isoformat()}..{hi.isoformat()} exceeds the series span"
            )
        i = series.first_index_at_or_after(lo)
        j = series.last_index_at_or_before(hi)
        if i is None or j is None or j < i:
            raise RangeOutOfBounds(f"{name} range selects no points")
        return i, j

    vi, vj = locate("validation", spec.validation_range)
    ti, tj = locate("test", spec.test_range)
    if vi == 0:
        raise RangeOutOfBounds("validation range leaves no training prefix")
    if ti != vj + 1:
        logger.warning("points between the validation and test ranges belong to neither split")
    if tj < len(series) - 1:
        logger.info("%d trailing points fall after the test range", len(series) - 1 - tj)
    return series.slice(0, vi), series.slice(vi, vj + 1), series.slice(ti, tj + 1)


def rolling_origins(
    full_series: TimeSeries,
    eval_range: tuple[datetime, datetime],
    horizon: int,
    stride: int,
    *,
    max_history: int | None = None,
) -> list[ForecastTask]:
    """Enumerate forecast tasks with origins advancing by `stride` across `eval_range`.

    Each task's history is every series point strictly before its origin
    (optionally capped at the most recent `max_history` points); its truth is
    the `horizon` points starting at the origin. No truth extends past the
    range end; uncovered trailing points are logged.
    """
    if horizon < 1 or stride < 1:
        raise ValueError("horizon and stride must be positive")
    lo, hi = eval_range
    if lo < full_series.start or hi > full_series.end:
        raise RangeOutOfBounds(
            f"evaluation range {lo.isoformat()}..{hi.isoformat()} exceeds the series span"
        )
    i0 = full_series.first_index_at_or_after(lo)
    i1 = full_series.last_index_at_or_before(hi)
    if i0 is None or i1 is None or i1 < i0:
        raise RangeOutOfBounds("evaluation range selects no points")
    n = i1 - i0 + 1
    if horizon > n:
        raise HorizonTooLarge(f"horizon {horizon} exceeds the {n}-point evaluation range")
    if i0 == 0:
        raise RangeOutOfBounds("no history available before the first origin")

    tasks: list[ForecastTask] = []
    idx = i0
    last_covered = i0 - 1
    while idx + horizon - 1 <= i1:
        hist_lo = 0 if max_history is None else max(0, idx - max_history)
        window = full_series.points[idx : idx + horizon]
        tasks.append(
            ForecastTask(
                history=full_series.slice(hist_lo, idx),
                origin=window[0].timestamp,
                horizon=horizon,
                truth=tuple(p.value for p in window),
                future_timestamps=tuple(p.timestamp for p in window),
            )
        )
        last_covered = max(last_covered, idx + horizon - 1)
        idx += stride
    uncovered = i1 - last_covered
    if uncovered > 0:
        logger.warning(
            "%d trailing points of the evaluation range are not covered by any task", uncovered
        )
    return tasks
