"""Completion backends: a live chat-completions client plus deterministic
offline backends for testing and acceptance.

Offline backends never touch the network. The covariate-aware oracle predicts
from the prompt's own data section (per-covariate history means, global mean
fallback), so covariate effects are provable without a model in the loop.
"""
from __future__ import annotations

import os
import random
import re
import threading
import time
from dataclasses import dataclass, replace

import requests

from .covariates import CENSORED_TEXT
from .errors import (
    AuthMissing,
    BackendUnavailable,
    ConfigError,
    MalformedResponse,
    UnparseablePrompt,
)
from .prompts import PromptText, format_value

API_KEY_ENV = "COVACAST_API_KEY"
RETRY_BASE_SECONDS = 0.5


@dataclass(frozen=True)
class BackendConfig:
    endpoint_url: str = "https://api.openai.com/v1"
    model_name: str = "gpt-4o-mini"
    temperature: float = 0.0
    max_output_tokens: int = 256
    timeout_seconds: float = 30.0
    max_retries: int = 3
    parallelism_limit: int = 4

    def __post_init__(self):
        if self.parallelism_limit < 1:
            raise ValueError("parallelism_limit must be at least 1")
        if not 0 <= self.max_retries <= 10:
            raise ValueError("max_retries must be between 0 and 10")
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    latency_seconds: float
    prompt_tokens: int
    completion_tokens: int
    attempt_count: int

    def __post_init__(self):
        if self.attempt_count < 1:
            raise ValueError("attempt_count must be at least 1")
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be nonnegative")


class Backend:
    """Prompt-in / text-out contract shared by live and offline providers."""

    backend_id = "base"
    parallelism = 1

    def complete(self, prompt: PromptText) -> CompletionResult:
        raise NotImplementedError

    def reseed(self, seed: int) -> None:
        """Reset any internal randomness; a no-op for deterministic backends."""

    def with_temperature(self, temperature: float) -> "Backend":
        return self


class ScriptedBackend(Backend):
    """Replays a fixed queue of replies; raises once exhausted."""

    backend_id = "scripted"

    def __init__(self, replies):
        self._replies = list(replies)
        self._lock = threading.Lock()

    def complete(self, prompt: PromptText) -> CompletionResult:
        with self._lock:
            if not self._replies:
                raise BackendUnavailable("scripted reply queue exhausted")
            text = self._replies.pop(0)
        return CompletionResult(
            text=text,
            latency_seconds=0.0,
            prompt_tokens=prompt.token_estimate,
            completion_tokens=len(text.split()),
            attempt_count=1,
        )


# --- covariate-aware oracle -------------------------------------------------

_DECOUPLED_RE = re.compile(
    r"Data: \[(.*?)\]\. Covariates: \[(.*?)\]\. Prediction covariates: \[(.*?)\]\."
)
_NO_COV_RE = re.compile(r"^data: \[(.*?)\]\.")
_PROMPTCAST_RE = re.compile(r"there were \[(.*?)\] values recorded\.")
_HORIZON_RE = re.compile(r"Predict the next (\d+) values")


def _float_list(text: str, context: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")] if text.strip() else []
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise UnparseablePrompt(f"bad number in {context}: {exc}") from None


def _requested_horizon(text: str) -> int:
    m = _HORIZON_RE.search(text)
    if not m:
        raise UnparseablePrompt("no forecast request found")
    return int(m.group(1))


def _parse_coupled(text: str):
    head, sep, _ = text.partition("\n\n")
    if not sep:
        raise UnparseablePrompt("no data section recognized")
    history: list[tuple[str, float]] = []
    future: list[str] = []
    for entry in head.split(", "):
        cov, colon, value = entry.partition(": ")
        if not colon:
            raise UnparseablePrompt(f"malformed pair {entry!r}")
        value = value.strip()
        if value == "":
            future.append(cov)
        else:
            try:
                history.append((cov, float(value)))
            except ValueError:
                raise UnparseablePrompt(f"non-numeric value in pair {entry!r}") from None
    if not history or not future:
        raise UnparseablePrompt("coupled prompt needs observed pairs and future keys")
    return history, future


def oracle_predictions(prompt_text: str) -> list[float]:
    """Predict from the prompt itself: per-covariate history means where
    covariates are aligned, global history mean otherwise."""
    m = _DECOUPLED_RE.search(prompt_text)
    if m:
        values = _float_list(m.group(1), "data list")
        hist_cov = [c.strip() for c in m.group(2).split(",")] if m.group(2).strip() else []
        fut_cov = [c.strip() for c in m.group(3).split(",")] if m.group(3).strip() else []
        if not values or len(hist_cov) != len(values) or not fut_cov:
            raise UnparseablePrompt("misaligned covariate lists")
        history = list(zip(hist_cov, values))
        return _conditional_means(history, fut_cov)

    m = _NO_COV_RE.match(prompt_text) or _PROMPTCAST_RE.search(prompt_text)
    if m:
        values = _float_list(m.group(1), "data list")
        if not values:
            raise UnparseablePrompt("empty data list")
        mean = sum(values) / len(values)
        return [mean] * _requested_horizon(prompt_text)

    history, future = _parse_coupled(prompt_text)
    return _conditional_means(history, future)


def _conditional_means(history, future_covariates) -> list[float]:
    groups: dict[str, list[float]] = {}
    for cov, value in history:
        groups.setdefault(cov, []).append(value)
    global_mean = sum(v for _, v in history) / len(history)
    out = []
    for cov in future_covariates:
        if cov == CENSORED_TEXT or cov not in groups:
            out.append(global_mean)
        else:
            member = groups[cov]
            out.append(sum(member) / len(member))
    return out


class OracleBackend(Backend):
    """Deterministic covariate-aware oracle; pure function of the prompt."""

    backend_id = "oracle"

    def complete(self, prompt: PromptText) -> CompletionResult:
        preds = oracle_predictions(prompt.text)
        text = "[" + ", ".join(format_value(p) for p in preds) + "]"
        return CompletionResult(
            text=text,
            latency_seconds=0.0,
            prompt_tokens=prompt.token_estimate,
            completion_tokens=len(text.split()),
            attempt_count=1,
        )


def oracle_backend_complete(prompt: PromptText) -> CompletionResult:
    return OracleBackend().complete(prompt)


class NoisyOracleBackend(Backend):
    """Oracle predictions plus seeded Gaussian noise, for replication studies."""

    backend_id = "noisy_oracle"

    def __init__(self, noise_scale: float = 1.0, seed: int = 0):
        if noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        self.noise_scale = noise_scale
        self._rng = random.Random(seed)
        self._lock = threading.Lock()

    def reseed(self, seed: int) -> None:
        with self._lock:
            self._rng = random.Random(seed)

    def complete(self, prompt: PromptText) -> CompletionResult:
        preds = oracle_predictions(prompt.text)
        with self._lock:
            noisy = [p + self._rng.gauss(0.0, self.noise_scale) for p in preds]
        text = "[" + ", ".join(format_value(p) for p in noisy) + "]"
        return CompletionResult(
            text=text,
            latency_seconds=0.0,
            prompt_tokens=prompt.token_estimate,
            completion_tokens=len(text.split()),
            attempt_count=1,
        )


class LiveBackend(Backend):
    """OpenAI-compatible chat-completions client with capped exponential backoff.

    Reads the bearer token from COVACAST_API_KEY; retries 429/5xx/timeouts with
    delay base * 2^k plus jitter, at most max_retries + 1 attempts in total.
    """

    def __init__(self, config: BackendConfig, *, session=None, sleep=time.sleep, api_key=None):
        self.config = config
        self.backend_id = f"live:{config.model_name}"
        self.parallelism = config.parallelism_limit
        self._session = session or requests.Session()
        self._sleep = sleep
        self._api_key = api_key
        self._semaphore = threading.Semaphore(config.parallelism_limit)

    def with_temperature(self, temperature: float) -> "LiveBackend":
        return LiveBackend(
            replace(self.config, temperature=temperature),
            session=self._session,
            sleep=self._sleep,
            api_key=self._api_key,
        )

    def complete(self, prompt: PromptText) -> CompletionResult:
        key = self._api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise AuthMissing(f"no API key; set {API_KEY_ENV}")
        url = self.config.endpoint_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt.text}],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        headers = {"Authorization": f"Bearer {key}"}

        start = time.monotonic()
        delay = RETRY_BASE_SECONDS
        attempts = 0
        last_reason = "no attempt made"
        while attempts <= self.config.max_retries:
            attempts += 1
            try:
                with self._semaphore:
                    resp = self._session.post(
                        url, json=payload, headers=headers, timeout=self.config.timeout_seconds
                    )
            except requests.RequestException as exc:
                last_reason = f"request failed: {exc}"
            else:
                if resp.status_code == 200:
                    return self._extract(resp, prompt, attempts, time.monotonic() - start)
                if resp.status_code in (401, 403):
                    raise AuthMissing(f"authentication rejected (HTTP {resp.status_code})")
                if resp.status_code != 429 and resp.status_code < 500:
                    raise BackendUnavailable(
                        f"HTTP {resp.status_code}: {resp.text[:200]}"
                    )
                last_reason = f"HTTP {resp.status_code}"
            if attempts <= self.config.max_retries:
                jitter = random.uniform(-delay / 2, delay / 2)
                self._sleep(max(0.0, delay + jitter))
                delay *= 2
        raise BackendUnavailable(f"retries exhausted after {attempts} attempts ({last_reason})")

    def _extract(self, resp, prompt, attempts, latency) -> CompletionResult:
        try:
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise MalformedResponse(f"reply lacks a message body: {exc}") from None
        if text is None:
            raise MalformedResponse("reply message content is null")
        usage = body.get("usage") or {}
        return CompletionResult(
            text=text,
            latency_seconds=latency,
            prompt_tokens=int(usage.get("prompt_tokens", prompt.token_estimate)),
            completion_tokens=int(usage.get("completion_tokens", len(text.split()))),
            attempt_count=attempts,
        )


OFFLINE_BACKEND_IDS = ("oracle", "noisy_oracle")


def make_backend(spec, seed: int = 0) -> Backend:
    """Build a backend from a config value: an offline id string or a mapping."""
    if isinstance(spec, Backend):
        return spec
    if isinstance(spec, str):
        if spec == "oracle":
            return OracleBackend()
        if spec == "noisy_oracle":
            return NoisyOracleBackend(seed=seed)
        raise ConfigError(f"unknown backend id {spec!r}; offline ids: {OFFLINE_BACKEND_IDS}")
    if isinstance(spec, dict):
        kind = spec.get("kind", "live")
        if kind == "oracle":
            return OracleBackend()
        if kind == "noisy_oracle":
            return NoisyOracleBackend(noise_scale=float(spec.get("noise_scale", 1.0)), seed=seed)
        if kind == "scripted":
            return ScriptedBackend(spec.get("replies", []))
        if kind == "live":
            fields = {k: v for k, v in spec.items() if k != "kind"}
            try:
                return LiveBackend(BackendConfig(**fields))
            except TypeError as exc:
                raise ConfigError(f"bad backend config: {exc}") from None
        raise ConfigError(f"unknown backend kind {kind!r}")
    raise ConfigError(f"backend spec must be a string or mapping, got {type(spec).__name__}")
