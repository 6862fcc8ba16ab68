import random

import pytest

from covacast import parse_forecast, render_list
from covacast.errors import CountMismatch, NoNumbersFound, NonFiniteToken


def test_canonical_list():
    assert parse_forecast("[1, 2, 3]", 3).values == (1.0, 2.0, 3.0)


def test_code_fence_reply():
    reply = "Here are the values:\n```\n[10.5, 11, 12]\n```"
    assert parse_forecast(reply, 3).values == (10.5, 11.0, 12.0)


def test_short_list_count_mismatch():
    with pytest.raises(CountMismatch) as exc:
        parse_forecast("[1, 2]", 3)
    assert (exc.value.found, exc.value.expected) == (2, 3)


def test_last_bracketed_list_wins():
    reply = "input was [1, 2, 3, 4] so my forecast is [7, 8, 9]"
    parsed = parse_forecast(reply, 3)
    assert parsed.values == (7.0, 8.0, 9.0)
    assert reply[parsed.source_span[0] : parsed.source_span[1]] == "[7, 8, 9]"


def test_prefix_and_suffix_do_not_change_values():
    core = "[4.5, -2, 3e2]"
    base = parse_forecast(core, 3).values
    assert parse_forecast("Sure! " + core, 3).values == base
    assert parse_forecast(core + "\nHope that helps.", 3).values == base


def test_fallback_scans_standalone_numbers():
    assert parse_forecast("next week: 12.5 then 13 then 14", 3).values == (12.5, 13.0, 14.0)


def test_fallback_count_mismatch():
    with pytest.raises(CountMismatch):
        parse_forecast("values 1 and 2", 3)


def test_no_numbers():
    with pytest.raises(NoNumbersFound):
        parse_forecast("I cannot forecast this series.", 2)
    with pytest.raises(NoNumbersFound):
        parse_forecast("   ", 2)


def test_fence_info_string_not_scanned():
    # the "3" in the fence info line must not count as a forecast value
    reply = "```python3\n[1, 2]\n```"
    assert parse_forecast(reply, 2).values == (1.0, 2.0)


def test_non_finite_token():
    with pytest.raises(NonFiniteToken):
        parse_forecast("[1e999, 2]", 2)


def test_scientific_and_signed():
    parsed = parse_forecast("[-1.5e-3, +2.25, .5]", 3)
    assert parsed.values == (-0.0015, 2.25, 0.5)


def test_bracket_with_words_is_skipped():
    reply = "[not numbers] then [1, 2]"
    assert parse_forecast(reply, 2).values == (1.0, 2.0)


def test_round_trip_seeded_vectors():
    rng = random.Random(20240517)
    for _ in range(1000):
        n = rng.randint(1, 12)
        values = []
        for _ in range(n):
            kind = rng.randrange(3)
            if kind == 0:
                values.append(rng.uniform(-1e6, 1e6))
            elif kind == 1:
                values.append(rng.uniform(-1, 1) * 10 ** rng.randint(-12, 12))
            else:
                values.append(float(rng.randint(-10**9, 10**9)))
        parsed = parse_forecast(render_list(values), n)
        assert list(parsed.values) == values


def test_parsing_is_pure():
    reply = "maybe [3, 4]?"
    assert parse_forecast(reply, 2) == parse_forecast(reply, 2)
