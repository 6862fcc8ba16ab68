from __future__ import annotations

import csv

import pytest

from covacast import Frequency, TimeSeries

_criterion_results = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(n, desc): acceptance criterion, reported pass/fail at session end"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _criterion_results.append((marker.args[0], marker.args[1], status))
    elif marker and report.when == "setup" and report.skipped:
        _criterion_results.append((marker.args[0], marker.args[1], "SKIP"))


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n, desc, status in sorted(_criterion_results):
        terminalreporter.write_line(f"criterion {n:>2} {status}: {desc}")

# Mon..Sun profile used across the offline end-to-end tests
WEEKDAY_PATTERN = (10.0, 20.0, 30.0, 40.0, 50.0, 5.0, 2.0)


def pattern_series(weeks: int = 20, start: str = "2024-01-01", noise=None) -> TimeSeries:
    """Daily series repeating WEEKDAY_PATTERN; `noise(i)` adds a perturbation."""
    values = []
    for i in range(weeks * 7):
        v = WEEKDAY_PATTERN[i % 7]
        if noise is not None:
            v += noise(i)
        values.append(v)
    return TimeSeries.from_values(start, values, Frequency.DAILY)


def write_csv(path, rows, header=("date", "cases")) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return str(path)


def write_pattern_csv(path, weeks: int = 20, start: str = "2024-01-01") -> str:
    series = pattern_series(weeks=weeks, start=start)
    rows = [(p.timestamp.date().isoformat(), p.value) for p in series.points]
    return write_csv(path, rows)


@pytest.fixture
def pattern_csv(tmp_path):
    return write_pattern_csv(tmp_path / "pattern.csv")


def eval_week_range(series: TimeSeries, first_week: int, weeks: int):
    """Inclusive timestamp range covering `weeks` whole weeks of a daily series."""
    stamps = series.timestamps
    lo = stamps[first_week * 7]
    hi = stamps[first_week * 7 + weeks * 7 - 1]
    return (lo, hi)


def base_config_dict(csv_path, output_dir, **overrides) -> dict:
    cfg = {
        "dataset": {
            "id": "pattern",
            "path": str(csv_path),
            "timestamp_column": "date",
            "value_column": "cases",
            "frequency": "daily",
        },
        "splits": {
            "validation": ["2024-04-01", "2024-04-21"],
            "test": ["2024-04-22", "2024-05-12"],
        },
        "horizons": [7],
        "formats": ["coupled", "no_covariate"],
        "covariate_kinds": ["day_of_week"],
        "comparators": ["no_covariate"],
        "backend": "oracle",
        "seed": 11,
        "output_dir": str(output_dir),
    }
    cfg.update(overrides)
    return cfg
