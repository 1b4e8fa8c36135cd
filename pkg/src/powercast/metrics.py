"""Forecast evaluation metrics and sample autocorrelation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAPE_ZERO_EPS = 1e-9


@dataclass(frozen=True)
class MetricReport:
    """RMSE/NRMSE/MAE/MAPE/R2 for one model on one evaluation set.

    RMSE and MAE carry the data's physical units; NRMSE is RMSE divided by
    the mean measured value; MAPE and R2 are reported in percent.
    """

    rmse: float
    nrmse: float
    mae: float
    mape_pct: float
    r2_pct: float
    n_used_mape: int


def compute_metrics(actual, predicted) -> MetricReport:
    """All five metrics for a prediction vector against measurements.

    MAPE excludes points with |actual| <= 1e-9 (division blow-up guard) and
    records how many points were retained.  Raises ValueError for constant
    measurements (R2 undefined) or when every point is MAPE-excluded.
    """
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if actual.shape != predicted.shape or actual.ndim != 1 or actual.size < 2:
        raise ValueError("need two equal-length vectors of at least 2 points")
    err = actual - predicted
    rmse = float(np.sqrt(np.mean(err * err)))
    mae = float(np.mean(np.abs(err)))

    mean_actual = float(np.mean(actual))
    ss_tot = float(np.sum((actual - mean_actual) ** 2))
    if ss_tot == 0.0:
        raise ValueError("constant measurements: R2 undefined")
    r2 = 1.0 - float(np.sum(err * err)) / ss_tot

    keep = np.abs(actual) > MAPE_ZERO_EPS
    n_used = int(keep.sum())
    if n_used == 0:
        raise ValueError("all points excluded from MAPE (|actual| ~ 0 everywhere)")
    mape = float(np.mean(np.abs(err[keep] / actual[keep]))) * 100.0

    return MetricReport(
        rmse=rmse,
        nrmse=rmse / mean_actual,
        mae=mae,
        mape_pct=mape,
        r2_pct=r2 * 100.0,
        n_used_mape=n_used,
    )


@dataclass(frozen=True)
class AcfResult:
    """Sample autocorrelation for lags 0..max_lag with the 1.96/sqrt(n) band."""

    coefficients: np.ndarray
    significance_bound: float

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.coefficients.size)


def acf(series, max_lag: int) -> AcfResult:
    """Sample ACF: r_k = sum (x_t - m)(x_{t+k} - m) / sum (x_t - m)^2."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if max_lag < 1 or n <= max_lag:
        raise ValueError("need series length > max_lag >= 1")
    centered = x - x.mean()
    denom = float(np.sum(centered * centered))
    if denom == 0.0:
        raise ValueError("constant series: ACF undefined")
    coeffs = np.empty(max_lag + 1)
    coeffs[0] = 1.0
    for k in range(1, max_lag + 1):
        coeffs[k] = float(np.sum(centered[:-k] * centered[k:])) / denom
    return AcfResult(coefficients=coeffs, significance_bound=1.96 / np.sqrt(n))


SUMMARY_ROWS = ("Average", "Median", "St-Dev", "Min", "Max")
_METRIC_FIELDS = ("rmse", "nrmse", "mae", "mape_pct", "r2_pct")


def summarize_reports(reports) -> dict:
    """Summary rows over a list of MetricReports (sample st-dev, ddof=1)."""
    cols = {f: np.array([getattr(r, f) for r in reports]) for f in _METRIC_FIELDS}
    out = {}
    for name, fn in (
        ("Average", np.mean),
        ("Median", np.median),
        ("St-Dev", lambda v: np.std(v, ddof=1) if v.size > 1 else 0.0),
        ("Min", np.min),
        ("Max", np.max),
    ):
        out[name] = {f: float(fn(cols[f])) for f in _METRIC_FIELDS}
    return out


def format_metric_table(reports, labels=None) -> str:
    """Delimited table: one row per model plus the five summary rows."""
    labels = labels or [str(i + 1) for i in range(len(reports))]
    lines = ["model,rmse,nrmse,mae,mape_pct,r2_pct"]
    for label, r in zip(labels, reports):
        lines.append(f"{label},{r.rmse!r},{r.nrmse!r},{r.mae!r},{r.mape_pct!r},{r.r2_pct!r}")
    summary = summarize_reports(reports)
    for name in SUMMARY_ROWS:
        row = summary[name]
        lines.append(
            f"{name},{row['rmse']!r},{row['nrmse']!r},{row['mae']!r},"
            f"{row['mape_pct']!r},{row['r2_pct']!r}"
        )
    return "\n".join(lines) + "\n"
