import pytest
import yaml

from covacast import ExperimentConfig, RunLog
from covacast.cli import main
from covacast.config import SELECTED
from covacast.errors import ConfigError

from conftest import base_config_dict, write_pattern_csv


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def config_yaml(tmp_path):
    csv_path = write_pattern_csv(tmp_path / "pattern.csv")
    cfg = base_config_dict(csv_path, tmp_path / "out")
    return write_yaml(tmp_path / "config.yaml", cfg)


def test_config_round_trips_through_snapshot(config_yaml):
    config = ExperimentConfig.from_yaml(config_yaml)
    snapshot = config.to_dict()
    again = ExperimentConfig.from_dict(snapshot)
    assert again.to_dict() == snapshot


def test_config_comparator_shorthands(tmp_path):
    csv_path = write_pattern_csv(tmp_path / "pattern.csv")
    cfg = base_config_dict(
        csv_path,
        tmp_path / "out",
        comparators=["no_covariate", "prompt_cast", "knowledge_guided", {"format": "decoupled", "covariate": "month"}],
        knowledge_text="Synthetic demand for a small shop.",
    )
    config = ExperimentConfig.from_dict(cfg)
    pairs = dict((f.value, c) for f, c in config.comparators)
    assert pairs["no_covariate"] is None
    assert pairs["prompt_cast"] is None
    assert pairs["knowledge_guided"] == SELECTED
    assert pairs["decoupled"].value == "month"


def test_config_validation_errors(tmp_path):
    csv_path = write_pattern_csv(tmp_path / "pattern.csv")
    bad = base_config_dict(csv_path, tmp_path / "out", horizons=[])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)
    bad = base_config_dict(csv_path, tmp_path / "out", covariate_kinds=[])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)  # coupled needs covariate kinds
    bad = base_config_dict(csv_path, tmp_path / "out", formats=["knowledge_guided"])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)  # knowledge text missing
    bad = base_config_dict(csv_path, tmp_path / "out", censoring_levels=[1.5])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_missing_key():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict({"dataset": {}})
    assert "dataset" in str(exc.value) or "missing" in str(exc.value)


def test_cli_validate_config(config_yaml, capsys):
    assert main(["validate-config", config_yaml]) == 0
    out = capsys.readouterr().out
    assert out.startswith("OK:")


def test_cli_validate_config_missing_column(tmp_path, capsys):
    csv_path = write_pattern_csv(tmp_path / "pattern.csv")
    cfg = base_config_dict(csv_path, tmp_path / "out")
    cfg["dataset"]["value_column"] = "nope"
    path = write_yaml(tmp_path / "c.yaml", cfg)
    assert main(["validate-config", path]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_run_and_report(config_yaml, tmp_path, capsys):
    assert main(["run", config_yaml]) == 0
    out = capsys.readouterr().out
    assert "run log:" in out
    log_path = str(tmp_path / "out" / "runlog.jsonl")
    assert main(["report", log_path, "--style", "markdown", "--out", str(tmp_path / "rep")]) == 0
    report_out = capsys.readouterr().out
    assert "Forecast report" in report_out
    assert (tmp_path / "rep" / "report.md").exists()
    assert any((tmp_path / "rep" / "figures").iterdir())
    assert main(["report", log_path, "--style", "csv", "--out", str(tmp_path / "repcsv")]) == 0
    assert (tmp_path / "repcsv" / "report.csv").exists()


def test_cli_run_dry_run_renders_without_backend_calls(config_yaml, tmp_path, capsys):
    assert main(["run", config_yaml, "--dry-run", "--output-dir", str(tmp_path / "dry")]) == 0
    records = RunLog.read(tmp_path / "dry" / "runlog.jsonl")
    kinds = {r["kind"] for r in records}
    assert "prompt" in kinds
    assert "completion" not in kinds and "run_record" not in kinds
    prompts = [r for r in records if r["kind"] == "prompt"]
    assert prompts and all(r["text"].endswith("No explanation.") for r in prompts)


def test_cli_render_prompts_verb(config_yaml, tmp_path, capsys):
    code = main(
        ["render-prompts", config_yaml, "--dry-run", "--output-dir", str(tmp_path / "rp")]
    )
    assert code == 0
    assert "prompts rendered" in capsys.readouterr().out


def test_cli_seed_override_changes_snapshot(config_yaml, tmp_path):
    main(["run", config_yaml, "--seed", "99", "--output-dir", str(tmp_path / "s99")])
    records = RunLog.read(tmp_path / "s99" / "runlog.jsonl")
    assert records[0]["config"]["seed"] == 99


def test_cli_partial_exit_code_on_cell_failure(tmp_path, capsys):
    csv_path = write_pattern_csv(tmp_path / "pattern.csv")
    # scripted backend with too few replies: later cells fail, earlier succeed
    replies = ["[" + ", ".join("1" for _ in range(7)) + "]"] * 3
    cfg = base_config_dict(
        csv_path,
        tmp_path / "out",
        backend={"kind": "scripted", "replies": replies},
        formats=["no_covariate", "coupled"],
    )
    path = write_yaml(tmp_path / "c.yaml", cfg)
    assert main(["run", path]) == 2
    records = RunLog.read(tmp_path / "out" / "runlog.jsonl")
    assert any(r["kind"] == "cell_failure" for r in records)
    assert any(r["kind"] == "run_record" for r in records)
