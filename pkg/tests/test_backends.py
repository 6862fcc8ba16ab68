import json

import pytest

from covacast import (
    BackendConfig,
    CovariateKind,
    Frequency,
    LiveBackend,
    NoisyOracleBackend,
    OracleBackend,
    PromptFormat,
    PromptSpec,
    PromptText,
    ScriptedBackend,
    TimeSeries,
    derive_covariate,
    make_backend,
    oracle_backend_complete,
    render_prompt,
    rolling_origins,
)
from covacast.backends import API_KEY_ENV
from covacast.errors import (
    AuthMissing,
    BackendUnavailable,
    ConfigError,
    MalformedResponse,
    UnparseablePrompt,
)

PROMPT = PromptText(text="data: [1, 2]. Predict the next 1 values of the time series. "
                         "Just return the values as a list. No explanation.",
                    token_estimate=20)


def test_backend_config_invariants():
    with pytest.raises(ValueError):
        BackendConfig(parallelism_limit=0)
    with pytest.raises(ValueError):
        BackendConfig(max_retries=11)


def test_scripted_replay_and_exhaustion():
    backend = ScriptedBackend(["[1, 2]"])
    result = backend.complete(PROMPT)
    assert result.text == "[1, 2]"
    assert result.attempt_count == 1
    with pytest.raises(BackendUnavailable):
        backend.complete(PROMPT)


def coupled_prompt(history_pairs, future_covs, horizon):
    pairs = [f"{c}: {v}" for c, v in history_pairs] + [f"{c}: " for c in future_covs]
    text = (
        ", ".join(pairs)
        + f"\n\nPredict the next {horizon} values in the time series. "
        "Just return the values as a list. No explanation."
    )
    return PromptText(text=text, token_estimate=len(text.split()))


def test_oracle_coupled_group_mean():
    prompt = coupled_prompt([("Mon", 10), ("Tue", 20), ("Mon", 12)], ["Mon"], 1)
    assert oracle_backend_complete(prompt).text == "[11]"


def test_oracle_no_covariate_global_mean():
    text = (
        "data: [10, 20, 12]. Predict the next 1 values of the time series. "
        "Just return the values as a list. No explanation."
    )
    result = oracle_backend_complete(PromptText(text=text, token_estimate=10))
    assert result.text == "[14]"


def test_oracle_unknown_future_covariate_falls_back():
    prompt = coupled_prompt([("Mon", 10), ("Tue", 20), ("Mon", 12)], ["unknown"], 1)
    assert oracle_backend_complete(prompt).text == "[14]"


def test_oracle_unseen_future_covariate_falls_back():
    prompt = coupled_prompt([("Mon", 10), ("Tue", 20)], ["Fri"], 1)
    assert oracle_backend_complete(prompt).text == "[15]"


def test_oracle_handles_every_rendered_format():
    full = TimeSeries.from_values("2024-01-01", [10, 20, 30, 40, 50, 5, 2, 10], Frequency.DAILY)
    task = rolling_origins(full, (full.timestamps[7], full.timestamps[7]), 1, 1)[0]
    cov = derive_covariate(
        task.history.timestamps + task.future_timestamps,
        CovariateKind.DAY_OF_WEEK,
        horizon_count=1,
    )
    backend = OracleBackend()
    for fmt in PromptFormat:
        spec = PromptSpec(
            fmt,
            None if fmt in (PromptFormat.NO_COVARIATE, PromptFormat.PROMPT_CAST) else CovariateKind.DAY_OF_WEEK,
            "Context sentence." if fmt is PromptFormat.KNOWLEDGE_GUIDED else None,
        )
        prompt = render_prompt(spec, task, None if spec.covariate_kind is None else cov)
        reply = backend.complete(prompt).text
        assert reply.startswith("[") and reply.endswith("]")
        if fmt.needs_covariates:
            assert reply == "[10]"  # Monday history mean is exactly 10


def test_oracle_unparseable_prompt():
    with pytest.raises(UnparseablePrompt):
        oracle_backend_complete(PromptText(text="tell me a story", token_estimate=4))


def test_oracle_deterministic_and_pure():
    prompt = coupled_prompt([("A", 1), ("B", 2)], ["A"], 1)
    assert oracle_backend_complete(prompt).text == oracle_backend_complete(prompt).text


def test_noisy_oracle_reseed_reproduces():
    prompt = coupled_prompt([("A", 1), ("B", 5)], ["A", "B"], 2)
    backend = NoisyOracleBackend(noise_scale=1.0, seed=4)
    first = backend.complete(prompt).text
    second = backend.complete(prompt).text
    assert first != second  # fresh noise per call
    backend.reseed(4)
    assert backend.complete(prompt).text == first


# --- live backend (no network: fake session) ------------------------------------


class FakeResponse:
    def __init__(self, status_code, body=None, text=""):
        self.status_code = status_code
        self._body = body
        self.text = text or json.dumps(body or {})

    def json(self):
        if self._body is None:
            raise ValueError("not json")
        return self._body


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append({"url": url, "json": json, "headers": headers})
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def ok_body(content="[5]"):
    return {
        "choices": [{"message": {"content": content}}],
        "usage": {"prompt_tokens": 12, "completion_tokens": 3},
    }


def test_live_auth_missing(monkeypatch):
    monkeypatch.delenv(API_KEY_ENV, raising=False)
    backend = LiveBackend(BackendConfig(), session=FakeSession([]))
    with pytest.raises(AuthMissing):
        backend.complete(PROMPT)


def test_live_success_round_trip():
    session = FakeSession([FakeResponse(200, ok_body())])
    backend = LiveBackend(BackendConfig(), session=session, api_key="k")
    result = backend.complete(PROMPT)
    assert result.text == "[5]"
    assert (result.prompt_tokens, result.completion_tokens) == (12, 3)
    call = session.calls[0]
    assert call["url"].endswith("/chat/completions")
    assert call["json"]["messages"] == [{"role": "user", "content": PROMPT.text}]
    assert call["headers"]["Authorization"] == "Bearer k"


def test_live_retries_on_429_with_backoff():
    session = FakeSession([FakeResponse(429), FakeResponse(500), FakeResponse(200, ok_body())])
    delays = []
    backend = LiveBackend(
        BackendConfig(max_retries=3), session=session, sleep=delays.append, api_key="k"
    )
    result = backend.complete(PROMPT)
    assert result.attempt_count == 3
    assert len(delays) == 2
    # base * 2^k plus jitter of at most half the base delay
    assert 0.25 <= delays[0] <= 0.75
    assert 0.5 <= delays[1] <= 1.5


def test_live_retries_exhausted():
    session = FakeSession([FakeResponse(503)] * 3)
    backend = LiveBackend(
        BackendConfig(max_retries=2), session=session, sleep=lambda _: None, api_key="k"
    )
    with pytest.raises(BackendUnavailable):
        backend.complete(PROMPT)


def test_live_non_retryable_4xx():
    session = FakeSession([FakeResponse(400, {"error": "bad"})])
    backend = LiveBackend(BackendConfig(), session=session, api_key="k")
    with pytest.raises(BackendUnavailable):
        backend.complete(PROMPT)
    assert len(session.calls) == 1


def test_live_auth_rejected_maps_to_auth_missing():
    session = FakeSession([FakeResponse(401, {"error": "no"})])
    backend = LiveBackend(BackendConfig(), session=session, api_key="bad")
    with pytest.raises(AuthMissing):
        backend.complete(PROMPT)


def test_live_malformed_response():
    session = FakeSession([FakeResponse(200, {"choices": []})])
    backend = LiveBackend(BackendConfig(), session=session, api_key="k")
    with pytest.raises(MalformedResponse):
        backend.complete(PROMPT)


def test_live_with_temperature_copies_config():
    backend = LiveBackend(BackendConfig(temperature=0.0), session=FakeSession([]), api_key="k")
    warmed = backend.with_temperature(1.0)
    assert warmed.config.temperature == 1.0
    assert backend.config.temperature == 0.0


def test_make_backend_dispatch():
    assert isinstance(make_backend("oracle"), OracleBackend)
    assert isinstance(make_backend("noisy_oracle", seed=1), NoisyOracleBackend)
    assert isinstance(make_backend({"kind": "scripted", "replies": ["[1]"]}), ScriptedBackend)
    live = make_backend({"kind": "live", "model_name": "m", "parallelism_limit": 2})
    assert isinstance(live, LiveBackend) and live.parallelism == 2
    with pytest.raises(ConfigError):
        make_backend("nonsense")
    with pytest.raises(ConfigError):
        make_backend({"kind": "live", "bogus_field": 1})
