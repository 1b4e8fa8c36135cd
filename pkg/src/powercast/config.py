"""Experiment configuration: JSON file with schema validation and defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

from .series import CsvSchema
from .training import Hyper


class ConfigError(Exception):
    """Malformed or incomplete experiment configuration."""


@dataclass(frozen=True)
class DatasetConfig:
    """One raw dataset entry: file, column schema, unit, resampling, holdout."""

    name: str
    path: Path
    unit: str
    schema: CsvSchema
    holdout_boundary: datetime
    resample_interval_s: Optional[int] = None  # None: keep the native grid


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple
    archs: tuple
    hyper: Hyper
    k: int
    seed: int
    alpha: float
    out_dir: Path

    def dataset(self, name: str) -> DatasetConfig:
        for ds in self.datasets:
            if ds.name == name:
                return ds
        raise ConfigError(f"unknown dataset {name!r}")


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError(f"missing {context} field {key!r}")
    return obj[key]


def _parse_schema(obj: dict, context: str) -> CsvSchema:
    time_columns = _require(obj, "time_columns", context)
    if not isinstance(time_columns, list) or not time_columns:
        raise ConfigError(f"{context}: time_columns must be a nonempty list")
    known = {
        "time_columns", "time_format", "value_column", "delimiter",
        "decimal", "missing_token", "period_column", "period_minutes",
    }
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"{context}: unknown schema keys {sorted(unknown)}")
    return CsvSchema(
        time_columns=tuple(time_columns),
        time_format=_require(obj, "time_format", context),
        value_column=_require(obj, "value_column", context),
        delimiter=obj.get("delimiter", ","),
        decimal=obj.get("decimal", "."),
        missing_token=obj.get("missing_token", "?"),
        period_column=obj.get("period_column"),
        period_minutes=obj.get("period_minutes"),
    )


def _parse_dataset(obj: dict, base: Path) -> DatasetConfig:
    name = _require(obj, "name", "dataset")
    context = f"dataset {name!r}"
    path = Path(_require(obj, "path", context))
    if not path.is_absolute():
        path = base / path
    try:
        boundary = datetime.fromisoformat(_require(obj, "holdout_boundary", context))
    except ValueError as exc:
        raise ConfigError(f"{context}: bad holdout_boundary: {exc}") from None
    interval = obj.get("resample_interval_s")
    if interval is not None:
        interval = int(interval)
        if interval <= 0:
            raise ConfigError(f"{context}: resample_interval_s must be positive")
    return DatasetConfig(
        name=name,
        path=path,
        unit=obj.get("unit", "kW"),
        schema=_parse_schema(_require(obj, "schema", context), context),
        holdout_boundary=boundary,
        resample_interval_s=interval,
    )


def _parse_hyper(obj: dict) -> Hyper:
    defaults = Hyper()
    known = {"hidden", "epochs", "batch", "dropout", "window", "lr", "rho", "eps"}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown hyperparameter keys {sorted(unknown)} (seed is top-level)")
    merged = {k: obj.get(k, getattr(defaults, k)) for k in known}
    hyper = Hyper(**merged)
    if hyper.hidden < 1 or hyper.window < 1 or hyper.batch < 1 or hyper.epochs < 0:
        raise ConfigError("hidden, window, batch must be >= 1 and epochs >= 0")
    if not 0.0 <= hyper.dropout < 1.0:
        raise ConfigError("dropout must lie in [0, 1)")
    return hyper


def parse_config(doc: dict, base: Path) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    datasets = _require(doc, "datasets", "config")
    if not isinstance(datasets, list) or not datasets:
        raise ConfigError("config needs a nonempty dataset list")
    parsed = tuple(_parse_dataset(d, base) for d in datasets)
    names = [d.name for d in parsed]
    if len(set(names)) != len(names):
        raise ConfigError("dataset names must be unique")

    archs = tuple(doc.get("archs", ["LSTM", "BLSTM"]))
    for arch in archs:
        if arch not in ("LSTM", "BLSTM"):
            raise ConfigError(f"unknown architecture {arch!r}")

    k = int(doc.get("k", 10))
    if k < 2:
        raise ConfigError("k must be >= 2")
    alpha = float(doc.get("alpha", 0.05))
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    seed = int(doc.get("seed", 0))
    hyper = _parse_hyper(doc.get("hyper", {})).with_seed(seed)

    out_dir = Path(doc.get("out_dir", "out"))
    if not out_dir.is_absolute():
        out_dir = base / out_dir
    return ExperimentConfig(
        datasets=parsed, archs=archs, hyper=hyper, k=k,
        seed=seed, alpha=alpha, out_dir=out_dir,
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate an experiment config; paths resolve relative to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc, base=path.parent.resolve())
