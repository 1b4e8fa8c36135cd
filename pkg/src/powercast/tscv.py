"""Expanding-window time-series cross-validation and holdout evaluation."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .metrics import MetricReport, compute_metrics
from .model import RecurrentModel, predict_batch
from .preprocess import fit_scaler, frame_windows
from .series import TimeSeries
from .training import Hyper, predict_holdout, train


@dataclass(frozen=True)
class FoldPlan:
    """One expanding-window fold: train on [0, train_end), test on the next block."""

    fold_id: int
    train_end: int
    test_start: int
    test_end: int

    def __post_init__(self):
        if not (0 < self.train_end == self.test_start < self.test_end):
            raise ValueError(f"inconsistent fold ranges: {self}")


def tscv_splits(n: int, k: int = 10) -> list:
    """Expanding-window folds: test_size = n // (k+1); fold i trains on
    [0, n - (k-i+1)*test_size) and tests on the following test_size points.

    Remainder points are absorbed into fold 1's training prefix.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    test_size = n // (k + 1)
    if test_size < 1 or n - k * test_size < 1:
        raise ValueError(f"series of length {n} too small for k={k} folds")
    plans = []
    for i in range(1, k + 1):
        train_end = n - (k - i + 1) * test_size
        plans.append(FoldPlan(i, train_end, train_end, train_end + test_size))
    return plans


@dataclass
class ExperimentRecord:
    """Outcome of one (dataset, arch, fold) training run."""

    dataset_id: str
    arch: str
    fold_id: int
    train_windows: int
    model: Optional[RecurrentModel]
    fold_metrics: MetricReport  # scaled space, for loss monitoring
    wall_time_s: float
    holdout_metrics: Optional[MetricReport] = None


def _fold_test_metrics(model, scaler, values, plan, window) -> MetricReport:
    scaled = scaler.transform(values[: plan.test_end])
    windows = np.lib.stride_tricks.sliding_window_view(scaled, window)
    inputs = np.ascontiguousarray(windows[plan.train_end - window : plan.test_end - window])
    preds = predict_batch(model, inputs)
    return compute_metrics(scaled[plan.test_start : plan.test_end], preds)


def _run_fold(args):
    values, plan, arch, hyper, dataset_id = args
    start = time.perf_counter()
    train_values = values[: plan.train_end]
    if plan.train_end <= hyper.window:
        raise ValueError(
            f"fold {plan.fold_id}: training slice of {plan.train_end} points "
            f"cannot frame window {hyper.window}"
        )
    scaler = fit_scaler(train_values)
    windows = frame_windows(scaler.transform(train_values), hyper.window)
    fold_hyper = hyper.with_seed(hyper.seed + plan.fold_id)
    model = train(
        arch,
        windows,
        fold_hyper,
        scaler=scaler,
        provenance={"dataset_id": dataset_id, "fold_id": plan.fold_id},
    )
    fold_metrics = _fold_test_metrics(model, scaler, values, plan, hyper.window)
    wall = time.perf_counter() - start
    return ExperimentRecord(
        dataset_id=dataset_id,
        arch=arch,
        fold_id=plan.fold_id,
        train_windows=len(windows),
        model=model,
        fold_metrics=fold_metrics,
        wall_time_s=wall,
    )


def run_tscv(ts_cv: TimeSeries, arch: str, hyper: Hyper, dataset_id: str,
             k: int = 10, workers: int = 1) -> list:
    """Train one model per fold and score it on the fold's own test block.

    Folds use seeds hyper.seed + fold_id, so results are identical whether
    folds run serially or across worker processes.
    """
    plans = tscv_splits(len(ts_cv), k)
    jobs = [(ts_cv.values, plan, arch, hyper, dataset_id) for plan in plans]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_fold, jobs))
    else:
        records = [_run_fold(job) for job in jobs]
    records.sort(key=lambda r: r.fold_id)
    return records


def evaluate_holdout_all(models, holdout: TimeSeries, history: TimeSeries) -> list:
    """Holdout MetricReport (physical units) for each fold model.

    ``history`` must supply at least the final window of pre-holdout points
    at the holdout's sampling interval.
    """
    if history.interval_s != holdout.interval_s:
        raise ValueError("history and holdout sampling intervals differ")
    full = np.concatenate([history.values, holdout.values])
    start = len(history)
    reports = []
    for model in models:
        if model.window > start:
            raise ValueError(f"history shorter than model window {model.window}")
        preds = predict_holdout(model, full, start)
        reports.append(compute_metrics(holdout.values, preds))
    return reports
