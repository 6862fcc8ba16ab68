"""Calendar covariate derivation and seeded random censoring."""
from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime
from enum import Enum

from .errors import RatioOutOfRange

# In-prompt rendering of a censored entry.
CENSORED_TEXT = "unknown"

# English names are fixed here; strftime %B/%A are locale-dependent and would
# break golden prompts across platforms.
MONTH_NAMES = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)
DAY_NAMES = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

CENSOR_SCOPES = ("both", "history_only", "horizon_only")


class CovariateKind(Enum):
    YEAR = "year"
    MONTH = "month"
    DATE = "date"
    DAY_OF_WEEK = "day_of_week"
    YEAR_WEEK = "year_week"

    @classmethod
    def parse(cls, text: str) -> "CovariateKind":
        key = text.strip().lower()
        for member in cls:
            if key == member.value:
                return member
        raise ValueError(f"unknown covariate kind {text!r}")

    def render(self, ts: datetime) -> str:
        if self is CovariateKind.YEAR:
            return str(ts.year)
        if self is CovariateKind.MONTH:
            return MONTH_NAMES[ts.month - 1]
        if self is CovariateKind.DATE:
            return ts.date().isoformat()
        if self is CovariateKind.DAY_OF_WEEK:
            return DAY_NAMES[ts.weekday()]
        iso = ts.isocalendar()
        return f"{iso[0]}-W{iso[1]:02d}"

    @property
    def display_name(self) -> str:
        return {
            CovariateKind.YEAR: "Year",
            CovariateKind.MONTH: "Month",
            CovariateKind.DATE: "Date",
            CovariateKind.DAY_OF_WEEK: "Day of Week",
            CovariateKind.YEAR_WEEK: "Year Week",
        }[self]


@dataclass(frozen=True)
class CovariateEntry:
    timestamp: datetime
    value: str | None  # None marks a censored entry

    @property
    def censored(self) -> bool:
        return self.value is None

    @property
    def rendered(self) -> str:
        return CENSORED_TEXT if self.value is None else self.value


@dataclass(frozen=True)
class CovariateSeries:
    """One covariate value per timestamp, covering history plus the horizon.

    The final `horizon_count` entries belong to the forecast horizon.
    """

    kind: CovariateKind | str
    entries: tuple[CovariateEntry, ...]
    horizon_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValueError("covariate series needs at least one entry")
        if not 0 <= self.horizon_count <= len(self.entries):
            raise ValueError("horizon_count out of range")
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.timestamp <= prev.timestamp:
                raise ValueError("covariate timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def history_entries(self) -> tuple[CovariateEntry, ...]:
        return self.entries[: len(self.entries) - self.horizon_count]

    @property
    def future_entries(self) -> tuple[CovariateEntry, ...]:
        return self.entries[len(self.entries) - self.horizon_count :]

    @property
    def censored_count(self) -> int:
        return sum(1 for e in self.entries if e.censored)


def derive_covariate(
    timestamps, kind: CovariateKind, *, horizon_count: int = 0
) -> CovariateSeries:
    """Render one covariate value per timestamp; pure and platform-independent."""
    stamps = tuple(timestamps)
    if not stamps:
        raise ValueError("timestamps must be nonempty")
    for prev, cur in zip(stamps, stamps[1:]):
        if cur <= prev:
            raise ValueError("timestamps must be strictly increasing")
    entries = tuple(CovariateEntry(ts, kind.render(ts)) for ts in stamps)
    return CovariateSeries(kind=kind, entries=entries, horizon_count=horizon_count)


def censor_covariates(
    cov: CovariateSeries, ratio: float, seed: int, *, scope: str = "both"
) -> CovariateSeries:
    """Censor exactly round(ratio * n) entries, chosen uniformly without replacement.

    `n` counts the entries in `scope` (history and horizon pooled by default).
    Deterministic for a given (cov, ratio, seed, scope).
    """
    if not 0.0 <= ratio <= 1.0:
        raise RatioOutOfRange(f"censoring ratio {ratio} outside [0, 1]")
    if scope not in CENSOR_SCOPES:
        raise ValueError(f"scope must be one of {CENSOR_SCOPES}")
    n_hist = len(cov.entries) - cov.horizon_count
    if scope == "both":
        candidates = list(range(len(cov.entries)))
    elif scope == "history_only":
        candidates = list(range(n_hist))
    else:
        candidates = list(range(n_hist, len(cov.entries)))
    # round half up: platform-stable exact counts at the nominal levels
    k = int(ratio * len(candidates) + 0.5)
    chosen = set(random.Random(seed).sample(candidates, k))
    entries = tuple(
        CovariateEntry(e.timestamp, None) if i in chosen else e
        for i, e in enumerate(cov.entries)
    )
    return CovariateSeries(kind=cov.kind, entries=entries, horizon_count=cov.horizon_count)
