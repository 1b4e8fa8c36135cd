"""Dataset ingestion: CSV loading, gap filling, resampling, holdout splitting."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Optional

import numpy as np


class CsvFormatError(Exception):
    """Row-level CSV problem; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for one raw dataset file.

    ``time_columns`` are joined with a space and parsed with ``time_format``
    (strptime).  When ``period_column`` is set, the timestamp is the parsed
    date plus (period - 1) * ``period_minutes`` — the convention of
    period-indexed demand files.
    """

    time_columns: tuple
    time_format: str
    value_column: str
    delimiter: str = ","
    decimal: str = "."
    missing_token: str = "?"
    period_column: Optional[str] = None
    period_minutes: Optional[int] = None


@dataclass
class RawRecords:
    """Raw rows in file order: timestamps plus values with a missing flag."""

    source_id: str
    unit: str
    timestamps: list  # of datetime
    values: np.ndarray  # float64, NaN where missing
    missing: np.ndarray  # bool

    def __post_init__(self):
        if len(self.timestamps) != self.values.size or self.values.size != self.missing.size:
            raise ValueError("timestamps/values/missing length mismatch")
        present = ~self.missing
        if not np.all(np.isfinite(self.values[present])):
            raise ValueError("non-missing rows must hold finite values")

    def __len__(self) -> int:
        return self.values.size


@dataclass
class TimeSeries:
    """Uniformly sampled series: start instant, interval in seconds, values."""

    start: datetime
    interval_s: int
    values: np.ndarray
    unit: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.interval_s <= 0:
            raise ValueError("interval must be positive")
        if self.values.size < 2:
            raise ValueError("time series needs at least two points")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("time series must not contain missing values")

    def __len__(self) -> int:
        return self.values.size

    def time_at(self, index: int) -> datetime:
        return self.start + timedelta(seconds=self.interval_s * index)

    @property
    def end(self) -> datetime:
        return self.time_at(len(self) - 1)

    def slice(self, lo: int, hi: int) -> "TimeSeries":
        return TimeSeries(self.time_at(lo), self.interval_s, self.values[lo:hi].copy(), self.unit)


@dataclass(frozen=True)
class SplitSpec:
    """First instant of the holdout period."""

    boundary: datetime


def load_csv(path, schema: CsvSchema, source_id: str = "", unit: str = "kW") -> RawRecords:
    """Parse one raw file into RawRecords, preserving file order.

    Rows whose value equals the missing token are flagged missing.  An
    unparseable timestamp or value raises CsvFormatError with its line
    number; non-increasing timestamps raise ValueError.
    """
    timestamps = []
    values = []
    missing = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=schema.delimiter)
        if reader.fieldnames is None:
            raise CsvFormatError("empty file", line=1)
        needed = set(schema.time_columns) | {schema.value_column}
        if schema.period_column:
            needed.add(schema.period_column)
        unknown = needed - set(reader.fieldnames)
        if unknown:
            raise ValueError(f"schema names absent columns: {sorted(unknown)}")
        for row in reader:
            line = reader.line_num
            stamp_text = " ".join((row[c] or "").strip() for c in schema.time_columns)
            try:
                stamp = datetime.strptime(stamp_text, schema.time_format)
            except ValueError:
                raise CsvFormatError(f"unparseable timestamp {stamp_text!r}", line) from None
            if schema.period_column:
                try:
                    period = int(row[schema.period_column])
                except ValueError:
                    raise CsvFormatError(
                        f"unparseable period {row[schema.period_column]!r}", line
                    ) from None
                stamp += timedelta(minutes=(period - 1) * schema.period_minutes)
            raw_value = (row[schema.value_column] or "").strip()
            if raw_value == schema.missing_token:
                values.append(np.nan)
                missing.append(True)
            else:
                if schema.decimal != ".":
                    raw_value = raw_value.replace(schema.decimal, ".")
                try:
                    values.append(float(raw_value))
                except ValueError:
                    raise CsvFormatError(f"unparseable value {raw_value!r}", line) from None
                missing.append(False)
            timestamps.append(stamp)
    for i in range(1, len(timestamps)):
        if timestamps[i] <= timestamps[i - 1]:
            raise ValueError(
                f"timestamps not strictly increasing at row {i + 1} ({timestamps[i]})"
            )
    return RawRecords(
        source_id=source_id or str(path),
        unit=unit,
        timestamps=timestamps,
        values=np.asarray(values, dtype=float),
        missing=np.asarray(missing, dtype=bool),
    )


def clean(raw: RawRecords, policy: str = "ffill"):
    """Replace missing values; returns (cleaned RawRecords, fill count).

    Forward fill copies the most recent non-missing value.  Leading missing
    values have no fill source and raise ValueError.
    """
    if policy != "ffill":
        raise ValueError(f"unknown gap policy {policy!r}")
    if len(raw) == 0:
        raise ValueError("no rows to clean")
    if raw.missing[0]:
        raise ValueError("leading missing value has no fill source")
    fills = int(raw.missing.sum())
    if fills == 0:
        return raw, 0
    idx = np.arange(raw.values.size)
    last_present = np.maximum.accumulate(np.where(raw.missing, -1, idx))
    values = raw.values[last_present]
    return (
        RawRecords(raw.source_id, raw.unit, list(raw.timestamps), values,
                   np.zeros(values.size, dtype=bool)),
        fills,
    )


def downsample(raw: RawRecords, interval, agg: str = "mean") -> TimeSeries:
    """Aggregate cleaned records into interval-aligned bins by arithmetic mean.

    Bins are anchored at the first timestamp; a partial trailing bin is kept
    if nonempty.  The interval must be a positive multiple of the native
    sampling step, and no bin inside the span may be empty.
    """
    if agg != "mean":
        raise ValueError(f"unsupported aggregation {agg!r}")
    if raw.missing.any():
        raise ValueError("downsample requires cleaned records")
    if len(raw) < 2:
        raise ValueError("need at least two rows to resample")
    interval_s = int(interval.total_seconds()) if isinstance(interval, timedelta) else int(interval)
    if interval_s <= 0:
        raise ValueError("interval must be positive")

    t0 = raw.timestamps[0]
    offsets = np.array([(t - t0).total_seconds() for t in raw.timestamps])
    native_s = int(np.diff(offsets).min())
    if interval_s < native_s:
        raise ValueError(f"interval {interval_s}s below native step {native_s}s (no upsampling)")
    if interval_s % native_s != 0:
        raise ValueError(f"interval {interval_s}s is not a multiple of native step {native_s}s")

    bins = (offsets // interval_s).astype(int)
    n_bins = int(bins[-1]) + 1
    counts = np.bincount(bins, minlength=n_bins)
    if (counts == 0).any():
        first = int(np.argmin(counts > 0))
        raise ValueError(f"empty bin at {t0 + timedelta(seconds=first * interval_s)}")
    sums = np.bincount(bins, weights=raw.values, minlength=n_bins)
    return TimeSeries(start=t0, interval_s=interval_s, values=sums / counts, unit=raw.unit)


def split_holdout(ts: TimeSeries, spec: SplitSpec):
    """Split at the boundary: (points before it, points from it on)."""
    delta = (spec.boundary - ts.start).total_seconds()
    count = int(np.ceil(delta / ts.interval_s))
    if count <= 0 or count >= len(ts):
        raise ValueError(
            f"boundary {spec.boundary.isoformat()} leaves an empty side "
            f"(series {ts.start.isoformat()} .. {ts.end.isoformat()})"
        )
    return ts.slice(0, count), ts.slice(count, len(ts))


@dataclass
class DatasetManifest:
    """Provenance record for one ingested dataset."""

    source_id: str
    unit: str
    raw_rows: int
    fills: int
    gap_policy: str
    interval_s: int
    points: int
    start: str
    end: str
    holdout_boundary: str
    train_points: int
    holdout_points: int

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        return cls(**json.loads(text))
