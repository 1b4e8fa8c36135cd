"""Min-max scaling fit on training data only, and sliding-window framing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MinMaxScaler:
    """Linear map of [data_min, data_max] onto [0, 1]; no clamping."""

    data_min: float
    data_max: float

    def __post_init__(self):
        if not (self.data_max > self.data_min):
            raise ValueError(f"degenerate scale: min={self.data_min}, max={self.data_max}")

    def transform(self, x):
        return (np.asarray(x, dtype=float) - self.data_min) / (self.data_max - self.data_min)

    def inverse_transform(self, z):
        return np.asarray(z, dtype=float) * (self.data_max - self.data_min) + self.data_min


def fit_scaler(train_values) -> MinMaxScaler:
    """Fit extrema on the training slice only.

    Raises ValueError for fewer than two points or a constant series.
    """
    values = np.asarray(train_values, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two values to fit a scaler")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise ValueError("constant series: scale is degenerate")
    return MinMaxScaler(lo, hi)


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised one-step-ahead framing of a scaled series.

    inputs[i] = series[i : i+window_len); targets[i] = series[i+window_len];
    origin_index is the index of the first target within the source slice.
    """

    window_len: int
    inputs: np.ndarray  # (n_samples, window_len)
    targets: np.ndarray  # (n_samples,)
    origin_index: int

    def __len__(self) -> int:
        return self.targets.shape[0]


def frame_windows(values, window_len: int) -> WindowedDataset:
    """Frame a series into windows of length ``window_len`` and next-step targets."""
    values = np.asarray(values, dtype=float)
    if window_len < 1:
        raise ValueError("window length must be >= 1")
    if values.ndim != 1 or values.size <= window_len:
        raise ValueError(f"series of length {values.size} cannot be framed with window {window_len}")
    n = values.size - window_len
    inputs = np.lib.stride_tricks.sliding_window_view(values, window_len)[:n].copy()
    targets = values[window_len:].copy()
    return WindowedDataset(window_len, inputs, targets, origin_index=window_len)
