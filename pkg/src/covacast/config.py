"""Declarative experiment configuration (YAML, nested key-value sections).

The resolved snapshot written to the run log round-trips through
`ExperimentConfig.from_dict`, so any offline run can be replayed bit-identically
from its own log.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import yaml

from .covariates import CENSOR_SCOPES, CovariateKind
from .errors import ConfigError
from .prompts import PromptFormat
from .series import Frequency, SplitSpec

# comparator covariate resolved to the selected pair's covariate at runtime
SELECTED = "selected"

PRE_AGGREGATIONS = ("none", "daily_total")

# per-frequency defaults: seasonal-naive period and AR orders
DEFAULT_PERIOD = {
    Frequency.WEEKLY: 52,
    Frequency.DAILY: 7,
    Frequency.MONTHLY: 12,
    Frequency.THIRTY_MINUTE: 18,
}
DEFAULT_AR_ORDER = {
    Frequency.MONTHLY: (12, 1),
    Frequency.WEEKLY: (2, 1),
    Frequency.DAILY: (2, 1),
    Frequency.THIRTY_MINUTE: (2, 1),
}


@dataclass(frozen=True)
class DatasetConfig:
    path: str
    timestamp_column: str
    value_column: str
    frequency: Frequency
    dataset_id: str
    extra_covariate_columns: tuple[str, ...] = ()
    pre_aggregation: str = "none"

    def to_dict(self) -> dict:
        return {
            "id": self.dataset_id,
            "path": self.path,
            "timestamp_column": self.timestamp_column,
            "value_column": self.value_column,
            "frequency": self.frequency.value,
            "extra_covariate_columns": list(self.extra_covariate_columns),
            "pre_aggregation": self.pre_aggregation,
        }


@dataclass(frozen=True)
class BaselineSpec:
    kind: str  # seasonal_naive | ar
    period: int | None = None
    p: int | None = None
    d: int | None = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.period is not None:
            out["period"] = self.period
        if self.p is not None:
            out["p"] = self.p
        if self.d is not None:
            out["d"] = self.d
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    splits: SplitSpec
    horizons: tuple[int, ...]
    formats: tuple[PromptFormat, ...]
    covariate_kinds: tuple[CovariateKind, ...] = ()
    knowledge_text: str | None = None
    selection_criterion: str = "rmse"
    replications: int = 1
    replication_temperature: float = 1.0
    censoring_levels: tuple[float, ...] = ()
    censoring_seeds: tuple[int, ...] = ()
    censoring_scope: str = "both"
    comparators: tuple[tuple[PromptFormat, object], ...] = ()
    baselines: tuple[BaselineSpec, ...] = ()
    backend: object = "oracle"  # offline id string or mapping
    seed: int = 0
    output_dir: str = ""
    stride: int | None = None
    max_history: int | None = None

    # --- construction -------------------------------------------------------

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path} must hold a mapping at the top level")
        return cls.from_dict(raw, base_dir=path.parent)

    @classmethod
    def from_dict(cls, raw: dict, base_dir=None) -> "ExperimentConfig":
        base = Path(base_dir) if base_dir is not None else Path.cwd()
        try:
            dataset = _parse_dataset(raw["dataset"], base)
            splits = _parse_splits(raw["splits"])
            horizons = tuple(int(h) for h in _as_list(raw["horizons"]))
            formats = tuple(PromptFormat.parse(f) for f in _as_list(raw["formats"]))
        except KeyError as exc:
            raise ConfigError(f"missing required config key: {exc.args[0]}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

        try:
            kinds = tuple(CovariateKind.parse(k) for k in _as_list(raw.get("covariate_kinds", [])))
            comparators = tuple(
                _parse_comparator(c) for c in _as_list(raw.get("comparators", []))
            )
            baselines = tuple(_parse_baseline(b) for b in _as_list(raw.get("baselines", [])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

        seed = int(raw.get("seed", 0))
        cfg = cls(
            dataset=dataset,
            splits=splits,
            horizons=horizons,
            formats=formats,
            covariate_kinds=kinds,
            knowledge_text=raw.get("knowledge_text"),
            selection_criterion=str(raw.get("selection_criterion", "rmse")).lower(),
            replications=int(raw.get("replications", 1)),
            replication_temperature=float(raw.get("replication_temperature", 1.0)),
            censoring_levels=tuple(float(v) for v in _as_list(raw.get("censoring_levels", []))),
            censoring_seeds=tuple(int(v) for v in _as_list(raw.get("censoring_seeds", []))) or (seed,),
            censoring_scope=str(raw.get("censoring_scope", "both")),
            comparators=comparators,
            baselines=baselines,
            backend=raw.get("backend", "oracle"),
            seed=seed,
            output_dir=str(raw.get("output_dir") or (Path("runs") / dataset.dataset_id)),
            stride=_opt_int(raw.get("stride")),
            max_history=_opt_int(raw.get("max_history")),
        )
        cfg.validate()
        return cfg

    # --- validation ---------------------------------------------------------

    def validate(self) -> None:
        problems = []
        if not self.horizons or any(h < 1 for h in self.horizons):
            problems.append("horizons must be a nonempty list of positive integers")
        if not self.formats:
            problems.append("formats must be nonempty")
        if self.selection_criterion not in ("rmse", "mae", "mape"):
            problems.append(f"unknown selection criterion {self.selection_criterion!r}")
        if self.replications < 1:
            problems.append("replications must be at least 1")
        if any(not 0.0 <= v <= 1.0 for v in self.censoring_levels):
            problems.append("censoring levels must lie in [0, 1]")
        if self.censoring_scope not in CENSOR_SCOPES:
            problems.append(f"censoring_scope must be one of {CENSOR_SCOPES}")
        if self.dataset.pre_aggregation not in PRE_AGGREGATIONS:
            problems.append(f"pre_aggregation must be one of {PRE_AGGREGATIONS}")
        needs_kinds = [f for f in self.formats if f.needs_covariates]
        if needs_kinds and not self.covariate_kinds:
            names = ", ".join(f.value for f in needs_kinds)
            problems.append(f"formats [{names}] require covariate_kinds")
        wants_knowledge = PromptFormat.KNOWLEDGE_GUIDED in self.formats or any(
            f is PromptFormat.KNOWLEDGE_GUIDED for f, _ in self.comparators
        )
        if wants_knowledge and not (self.knowledge_text or "").strip():
            problems.append("knowledge_guided prompts require knowledge_text")
        if self.stride is not None and self.stride < 1:
            problems.append("stride must be positive")
        if self.max_history is not None and self.max_history < 1:
            problems.append("max_history must be positive")
        for b in self.baselines:
            if b.kind not in ("seasonal_naive", "ar"):
                problems.append(f"unknown baseline kind {b.kind!r}")
        if problems:
            raise ConfigError("; ".join(problems))

    # --- snapshot -----------------------------------------------------------

    def to_dict(self) -> dict:
        vs, ve = self.splits.validation_range
        ts, te = self.splits.test_range
        return {
            "dataset": self.dataset.to_dict(),
            "splits": {
                "validation": [vs.isoformat(), ve.isoformat()],
                "test": [ts.isoformat(), te.isoformat()],
            },
            "horizons": list(self.horizons),
            "formats": [f.value for f in self.formats],
            "covariate_kinds": [k.value for k in self.covariate_kinds],
            "knowledge_text": self.knowledge_text,
            "selection_criterion": self.selection_criterion,
            "replications": self.replications,
            "replication_temperature": self.replication_temperature,
            "censoring_levels": list(self.censoring_levels),
            "censoring_seeds": list(self.censoring_seeds),
            "censoring_scope": self.censoring_scope,
            "comparators": [
                {"format": f.value, "covariate": (c.value if isinstance(c, CovariateKind) else c)}
                for f, c in self.comparators
            ],
            "baselines": [b.to_dict() for b in self.baselines],
            "backend": self.backend,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "stride": self.stride,
            "max_history": self.max_history,
        }

    def default_period(self) -> int:
        return DEFAULT_PERIOD[self.dataset.frequency]

    def default_ar_order(self) -> tuple[int, int]:
        return DEFAULT_AR_ORDER[self.dataset.frequency]


# --- parsing helpers ----------------------------------------------------------


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _opt_int(value):
    return None if value is None else int(value)


def _parse_timestamp(value) -> datetime:
    if isinstance(value, datetime):
        return value
    if hasattr(value, "year") and not isinstance(value, str):  # yaml date
        return datetime(value.year, value.month, value.day)
    try:
        return datetime.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"bad timestamp {value!r}") from None


def _parse_dataset(raw: dict, base: Path) -> DatasetConfig:
    for key in ("path", "timestamp_column", "value_column", "frequency"):
        if key not in raw:
            raise ConfigError(f"dataset config missing {key!r}")
    path = Path(str(raw["path"]))
    if not path.is_absolute():
        path = (base / path).resolve()
    frequency = Frequency.parse(str(raw["frequency"]))
    default_agg = "daily_total" if frequency is Frequency.THIRTY_MINUTE else "none"
    return DatasetConfig(
        path=str(path),
        timestamp_column=str(raw["timestamp_column"]),
        value_column=str(raw["value_column"]),
        frequency=frequency,
        dataset_id=str(raw.get("id") or path.stem),
        extra_covariate_columns=tuple(str(c) for c in _as_list(raw.get("extra_covariate_columns"))),
        pre_aggregation=str(raw.get("pre_aggregation", default_agg)),
    )


def _parse_splits(raw: dict) -> SplitSpec:
    try:
        val = raw["validation"]
        test = raw["test"]
    except (KeyError, TypeError):
        raise ConfigError("splits must define 'validation' and 'test' ranges") from None
    if len(val) != 2 or len(test) != 2:
        raise ConfigError("each split range needs [start, end]")
    return SplitSpec(
        validation_range=(_parse_timestamp(val[0]), _parse_timestamp(val[1])),
        test_range=(_parse_timestamp(test[0]), _parse_timestamp(test[1])),
    )


def _parse_comparator(raw) -> tuple[PromptFormat, object]:
    if isinstance(raw, str):
        fmt = PromptFormat.parse(raw)
        if fmt in (PromptFormat.NO_COVARIATE, PromptFormat.PROMPT_CAST):
            return fmt, None
        return fmt, SELECTED
    if isinstance(raw, dict):
        fmt = PromptFormat.parse(raw["format"])
        cov = raw.get("covariate")
        if cov in (None, SELECTED):
            resolved = cov if fmt.needs_covariates or fmt is PromptFormat.PROMPT_CAST else None
            if fmt.needs_covariates and cov is None:
                resolved = SELECTED
            return fmt, resolved
        return fmt, CovariateKind.parse(cov)
    raise ConfigError(f"bad comparator entry {raw!r}")


def _parse_baseline(raw) -> BaselineSpec:
    if isinstance(raw, str):
        return BaselineSpec(kind=raw)
    if isinstance(raw, dict):
        return BaselineSpec(
            kind=str(raw.get("kind", "")),
            period=_opt_int(raw.get("period")),
            p=_opt_int(raw.get("p")),
            d=_opt_int(raw.get("d")),
        )
    raise ConfigError(f"bad baseline entry {raw!r}")
