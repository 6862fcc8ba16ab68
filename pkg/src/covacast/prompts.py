"""Deterministic prompt rendering for the six supported formats.

Golden fixture files under tests/golden/ freeze the canonical whitespace;
rendering is byte-identical across runs and platforms (LF newlines only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .covariates import CovariateKind, CovariateSeries
from .errors import (
    CovariateMisaligned,
    MissingCovariates,
    MissingKnowledgeText,
    NonFiniteValue,
)
from .series import ForecastTask


class PromptFormat(Enum):
    NO_COVARIATE = "no_covariate"
    COUPLED = "coupled"
    DECOUPLED = "decoupled"
    CONTEXTUALIZED = "contextualized"
    PROMPT_CAST = "prompt_cast"
    KNOWLEDGE_GUIDED = "knowledge_guided"

    @classmethod
    def parse(cls, text: str) -> "PromptFormat":
        key = text.strip().lower()
        for member in cls:
            if key == member.value:
                return member
        raise ValueError(f"unknown prompt format {text!r}")

    @property
    def needs_covariates(self) -> bool:
        return self in (
            PromptFormat.COUPLED,
            PromptFormat.DECOUPLED,
            PromptFormat.CONTEXTUALIZED,
            PromptFormat.KNOWLEDGE_GUIDED,
        )

    @property
    def display_name(self) -> str:
        return {
            PromptFormat.NO_COVARIATE: "No-Covariate",
            PromptFormat.COUPLED: "Coupled",
            PromptFormat.DECOUPLED: "Decoupled",
            PromptFormat.CONTEXTUALIZED: "Contextualized",
            PromptFormat.PROMPT_CAST: "PromptCast",
            PromptFormat.KNOWLEDGE_GUIDED: "Knowledge-Guided",
        }[self]


CONTEXT_BLOCK = (
    "The sequence represents a univariate time series with aligned covariates. "
    "These covariates exhibit recurring patterns (e.g., weekly or seasonal cycles) "
    "that influence the behavior of the series. Use both the observed values and "
    "the structure of the covariates to identify trends."
)


def format_value(x: float) -> str:
    """Render a number for prompts: integers collapse ("120"), fractions keep up
    to 6 significant fractional digits with trailing zeros trimmed ("10.5")."""
    xf = float(x)
    if not math.isfinite(xf):
        raise NonFiniteValue(f"cannot render {x!r}")
    if xf == int(xf):
        return str(int(xf))
    frac = abs(xf) - int(abs(xf))
    leading_zeros = max(0, -int(math.floor(math.log10(frac))) - 1)
    decimals = 6 + leading_zeros
    out = f"{xf:.{decimals}f}".rstrip("0").rstrip(".")
    return out if out not in ("", "-0", "-") else "0"


@dataclass(frozen=True)
class PromptSpec:
    format: PromptFormat
    covariate_kind: CovariateKind | None = None
    knowledge_text: str | None = None

    def __post_init__(self):
        if self.format is PromptFormat.NO_COVARIATE and self.covariate_kind is not None:
            raise ValueError("the no-covariate format takes no covariate kind")


@dataclass(frozen=True)
class PromptText:
    text: str
    token_estimate: int  # whitespace token proxy for cost reporting only

    def __post_init__(self):
        if not self.text:
            raise ValueError("prompt text must be nonempty")


def _check_alignment(task: ForecastTask, cov: CovariateSeries) -> None:
    expected = len(task.history) + task.horizon
    if len(cov.entries) != expected or cov.horizon_count != task.horizon:
        raise CovariateMisaligned(
            f"covariate series has {len(cov.entries)} entries "
            f"({cov.horizon_count} future), task needs {expected} ({task.horizon} future)"
        )
    for entry, ts in zip(cov.entries, task.history.timestamps + task.future_timestamps):
        if entry.timestamp != ts:
            raise CovariateMisaligned(f"covariate timestamp {entry.timestamp} != task {ts}")


def render_prompt(
    spec: PromptSpec, task: ForecastTask, covariates: CovariateSeries | None = None
) -> PromptText:
    """Render the task into the exact prompt string for `spec.format`."""
    fmt = spec.format
    values = [format_value(v) for v in task.history.values]
    vals = ", ".join(values)
    h = task.horizon

    hist_cov: list[str] = []
    fut_cov: list[str] = []
    if covariates is not None:
        _check_alignment(task, covariates)
        hist_cov = [e.rendered for e in covariates.history_entries]
        fut_cov = [e.rendered for e in covariates.future_entries]
    elif fmt.needs_covariates:
        raise MissingCovariates(f"{fmt.value} prompts require a covariate series")

    if fmt is PromptFormat.NO_COVARIATE:
        text = (
            f"data: [{vals}]. Predict the next {h} values of the time series. "
            "Just return the values as a list. No explanation."
        )
    elif fmt is PromptFormat.COUPLED:
        pairs = [f"{c}: {v}" for c, v in zip(hist_cov, values)]
        pairs += [f"{c}: " for c in fut_cov]
        text = (
            ", ".join(pairs)
            + f"\n\nPredict the next {h} values in the time series. "
            "Just return the values as a list. No explanation."
        )
    elif fmt is PromptFormat.PROMPT_CAST:
        if covariates is not None:
            first, last = hist_cov[0], hist_cov[-1]
        else:
            first = task.history.start.date().isoformat()
            last = task.history.end.date().isoformat()
        text = (
            f"From {first} to {last}, there were [{vals}] values recorded. "
            f"Predict the next {h} values. "
            "Just return the prediction values as a list of numbers. No explanation."
        )
    else:
        body = (
            f"Data: [{vals}]. Covariates: [{', '.join(hist_cov)}]. "
            f"Prediction covariates: [{', '.join(fut_cov)}]."
        )
        if fmt is PromptFormat.DECOUPLED:
            text = (
                body
                + f" Predict the next {h} values of the time series. "
                "Just return the prediction values as a list. No explanation."
            )
        elif fmt is PromptFormat.CONTEXTUALIZED:
            text = (
                body
                + " "
                + CONTEXT_BLOCK
                + f" Predict the next {h} values based on the observed sequence and "
                "the upcoming covariate pattern. "
                "Just return the prediction values as a list. No explanation."
            )
        else:  # KNOWLEDGE_GUIDED
            if not spec.knowledge_text or not spec.knowledge_text.strip():
                raise MissingKnowledgeText("knowledge-guided prompts need knowledge_text")
            text = (
                spec.knowledge_text.strip()
                + " "
                + body
                + f" Predict the next {h} values of the time series. "
                "Just return the prediction values as a list. No explanation."
            )

    return PromptText(text=text, token_estimate=len(text.split()))
