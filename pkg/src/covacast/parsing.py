"""Extraction of exactly H numeric forecasts from free-form model replies.

Grammar: mask markdown code fences, take the last bracketed list of
comma/whitespace-separated decimal numbers; if no such list exists, scan all
standalone numbers in reading order. The located sequence must contain exactly
the requested number of values.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import CountMismatch, NoNumbersFound, NonFiniteToken

NUMBER_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
BRACKET_RE = re.compile(r"\[[^\[\]]*\]")
FENCE_LINE_RE = re.compile(r"^[ \t]*```.*$", re.MULTILINE)


@dataclass(frozen=True)
class ParsedForecast:
    values: tuple[float, ...]
    source_span: tuple[int, int]  # character range of the matched list in the reply


def _mask_fences(text: str) -> str:
    # replace fence marker lines with spaces so spans stay valid in the original
    return FENCE_LINE_RE.sub(lambda m: " " * len(m.group(0)), text)


def _to_floats(tokens) -> tuple[float, ...]:
    values = []
    for tok in tokens:
        v = float(tok)
        if not math.isfinite(v):
            raise NonFiniteToken(f"token {tok!r} is not finite")
        values.append(v)
    return tuple(values)


def parse_forecast(reply: str, horizon: int) -> ParsedForecast:
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if not reply or not reply.strip():
        raise NoNumbersFound("empty reply")
    masked = _mask_fences(reply)

    last_list = None
    for m in BRACKET_RE.finditer(masked):
        inner = m.group(0)[1:-1]
        tokens = NUMBER_RE.findall(inner)
        if not tokens:
            continue
        residue = NUMBER_RE.sub("", inner).replace(",", "").strip()
        if residue:  # brackets holding anything besides numbers and separators
            continue
        last_list = (m.start(), m.end(), tokens)

    if last_list is not None:
        start, end, tokens = last_list
        if len(tokens) != horizon:
            raise CountMismatch(len(tokens), horizon)
        return ParsedForecast(values=_to_floats(tokens), source_span=(start, end))

    matches = list(NUMBER_RE.finditer(masked))
    if not matches:
        raise NoNumbersFound("no numbers in reply")
    if len(matches) != horizon:
        raise CountMismatch(len(matches), horizon)
    values = _to_floats(m.group(0) for m in matches)
    return ParsedForecast(values=values, source_span=(matches[0].start(), matches[-1].end()))


def render_list(values) -> str:
    """Full-precision bracketed rendering; parse_forecast round-trips it exactly."""
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"
