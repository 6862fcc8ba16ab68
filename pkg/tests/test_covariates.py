import random
from datetime import date, datetime

import pytest

from covacast import (
    CENSORED_TEXT,
    CovariateKind,
    Frequency,
    censor_covariates,
    derive_covariate,
    timestamps_for,
)
from covacast.covariates import DAY_NAMES, MONTH_NAMES
from covacast.errors import RatioOutOfRange


def test_year_week_example():
    cov = derive_covariate([datetime(2024, 1, 1)], CovariateKind.YEAR_WEEK)
    assert cov.entries[0].rendered == "2024-W01"


def test_year_week_uses_iso_year():
    # 2016-01-01 belongs to ISO week 53 of 2015
    cov = derive_covariate([datetime(2016, 1, 1)], CovariateKind.YEAR_WEEK)
    assert cov.entries[0].rendered == "2015-W53"


def test_day_of_week_example():
    cov = derive_covariate([datetime(2024, 1, 1)], CovariateKind.DAY_OF_WEEK)
    assert cov.entries[0].rendered == "Monday"


def test_date_round_trips():
    stamps = timestamps_for(datetime(2023, 11, 20), 30, Frequency.DAILY)
    cov = derive_covariate(stamps, CovariateKind.DATE)
    for entry in cov.entries:
        assert date.fromisoformat(entry.rendered) == entry.timestamp.date()


def test_all_kinds_round_trip():
    rng = random.Random(5)
    stamps = sorted(
        {datetime(rng.randint(1995, 2030), rng.randint(1, 12), rng.randint(1, 28)) for _ in range(120)}
    )
    for kind in CovariateKind:
        cov = derive_covariate(stamps, kind)
        for entry in cov.entries:
            ts = entry.timestamp
            text = entry.rendered
            if kind is CovariateKind.YEAR:
                assert int(text) == ts.year
            elif kind is CovariateKind.MONTH:
                assert MONTH_NAMES.index(text) + 1 == ts.month
            elif kind is CovariateKind.DATE:
                assert date.fromisoformat(text) == ts.date()
            elif kind is CovariateKind.DAY_OF_WEEK:
                assert DAY_NAMES.index(text) == ts.weekday()
            else:
                iso_year, week = text.split("-W")
                iso = ts.isocalendar()
                assert (int(iso_year), int(week)) == (iso[0], iso[1])


def test_rendering_is_pure():
    stamps = timestamps_for(datetime(2024, 3, 1), 10, Frequency.WEEKLY)
    a = derive_covariate(stamps, CovariateKind.YEAR_WEEK)
    b = derive_covariate(stamps, CovariateKind.YEAR_WEEK)
    assert a == b


def _cov(n=10, horizon=0):
    stamps = timestamps_for(datetime(2024, 1, 1), n, Frequency.DAILY)
    return derive_covariate(stamps, CovariateKind.DAY_OF_WEEK, horizon_count=horizon)


def test_censor_zero_is_identity():
    cov = _cov()
    assert censor_covariates(cov, 0.0, seed=3) == cov


def test_censor_one_masks_everything():
    out = censor_covariates(_cov(), 1.0, seed=3)
    assert all(e.censored for e in out.entries)
    assert all(e.rendered == CENSORED_TEXT for e in out.entries)


def test_censor_exact_count_and_determinism():
    cov = _cov(10)
    out1 = censor_covariates(cov, 0.3, seed=99)
    out2 = censor_covariates(cov, 0.3, seed=99)
    assert out1 == out2
    assert out1.censored_count == 3
    # non-selected entries unchanged, order and length preserved
    assert len(out1) == len(cov)
    for before, after in zip(cov.entries, out1.entries):
        assert after.timestamp == before.timestamp
        assert after.censored or after.value == before.value


@pytest.mark.parametrize("ratio,expected", [(0.0, 0), (0.25, 3), (0.5, 5), (0.75, 8), (1.0, 10)])
def test_censor_count_rounds(ratio, expected):
    assert censor_covariates(_cov(10), ratio, seed=1).censored_count == expected


def test_censor_scopes():
    cov = _cov(10, horizon=3)
    hist = censor_covariates(cov, 1.0, seed=0, scope="history_only")
    assert all(e.censored for e in hist.history_entries)
    assert not any(e.censored for e in hist.future_entries)
    fut = censor_covariates(cov, 1.0, seed=0, scope="horizon_only")
    assert not any(e.censored for e in fut.history_entries)
    assert all(e.censored for e in fut.future_entries)


def test_censor_ratio_out_of_range():
    with pytest.raises(RatioOutOfRange):
        censor_covariates(_cov(), 1.5, seed=0)
    with pytest.raises(RatioOutOfRange):
        censor_covariates(_cov(), -0.1, seed=0)


def test_distinct_seeds_give_distinct_masks():
    cov = _cov(24)
    masks = set()
    distinct = 0
    for seed in range(50):
        out = censor_covariates(cov, 0.5, seed=seed)
        mask = tuple(e.censored for e in out.entries)
        if mask not in masks:
            distinct += 1
        masks.add(mask)
    # collisions are astronomically unlikely; allow one fluke
    assert distinct >= 49
