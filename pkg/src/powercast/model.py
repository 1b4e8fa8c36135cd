"""Recurrent model definitions: LSTM cell math, bidirectional wiring, heads.

The single-step cell here is the readable reference; batched training and
prediction go through the sequence kernels in :mod:`powercast.kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .preprocess import MinMaxScaler

ARCH_LSTM = "LSTM"
ARCH_BLSTM = "BLSTM"


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class LstmParams:
    """Gate weights and biases of one LSTM cell.

    Each weight matrix has shape (hidden, hidden + input_size) and acts on
    the concatenation [h_prev, x_t]; each bias has length hidden.
    """

    w_f: np.ndarray
    w_i: np.ndarray
    w_c: np.ndarray
    w_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        mats = (self.w_f, self.w_i, self.w_c, self.w_o)
        vecs = (self.b_f, self.b_i, self.b_c, self.b_o)
        shapes = {m.shape for m in mats}
        if len(shapes) != 1 or mats[0].ndim != 2:
            raise ValueError(f"gate weight shapes differ: {[m.shape for m in mats]}")
        lens = {v.shape for v in vecs}
        if len(lens) != 1 or vecs[0].shape != (mats[0].shape[0],):
            raise ValueError("gate bias lengths inconsistent with weight rows")
        for arr in mats + vecs:
            if not np.all(np.isfinite(arr)):
                raise ValueError("nonfinite cell parameter")

    @property
    def hidden(self) -> int:
        return self.w_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_f.shape[1] - self.w_f.shape[0]

    def stacked(self):
        """Stack gates into the (4*hidden, hidden+input) kernel layout."""
        w = np.concatenate([self.w_f, self.w_i, self.w_c, self.w_o], axis=0)
        b = np.concatenate([self.b_f, self.b_i, self.b_c, self.b_o])
        return np.ascontiguousarray(w), np.ascontiguousarray(b)


@dataclass
class DenseHead:
    """Linear readout: y = w_forward.h_fwd (+ w_backward.h_bwd) + bias."""

    w_forward: np.ndarray  # (hidden,)
    w_backward: np.ndarray | None  # (hidden,) for BLSTM, else None
    bias: np.ndarray  # shape (1,)

    def __post_init__(self):
        if self.w_forward.ndim != 1:
            raise ValueError("head forward weights must be a vector")
        if self.w_backward is not None and self.w_backward.shape != self.w_forward.shape:
            raise ValueError("head backward weights must match forward shape")
        if self.bias.shape != (1,):
            raise ValueError("head bias must have shape (1,)")


@dataclass
class RecurrentModel:
    """A trained (or initialized) forecaster plus everything needed to use it."""

    arch: str
    hidden: int
    window: int
    forward_cell: LstmParams
    backward_cell: LstmParams | None
    head: DenseHead
    dropout_rate: float
    scaler: MinMaxScaler | None
    seed: int
    provenance: dict = field(default_factory=dict)
    epoch_losses: list = field(default_factory=list)

    def __post_init__(self):
        if self.arch not in (ARCH_LSTM, ARCH_BLSTM):
            raise ValueError(f"unknown architecture {self.arch!r}")
        if self.arch == ARCH_BLSTM:
            if self.backward_cell is None or self.head.w_backward is None:
                raise ValueError("BLSTM requires a backward cell and head slice")
        else:
            if self.backward_cell is not None or self.head.w_backward is not None:
                raise ValueError("LSTM must not carry backward parameters")

    def parameters(self) -> dict:
        """Flat name -> array view of every trainable parameter."""
        params = {}
        for prefix, cell in (("fwd", self.forward_cell), ("bwd", self.backward_cell)):
            if cell is None:
                continue
            for name in ("w_f", "w_i", "w_c", "w_o", "b_f", "b_i", "b_c", "b_o"):
                params[f"{prefix}.{name}"] = getattr(cell, name)
        params["head.w_forward"] = self.head.w_forward
        if self.head.w_backward is not None:
            params["head.w_backward"] = self.head.w_backward
        params["head.bias"] = self.head.bias
        return params


class GateCache(NamedTuple):
    """Per-step activations retained for backpropagation through time."""

    f: np.ndarray
    i: np.ndarray
    candidate: np.ndarray
    o: np.ndarray
    c: np.ndarray
    h: np.ndarray


def lstm_cell_forward(x_t, h_prev, c_prev, params: LstmParams):
    """One LSTM step.

    Computes f = sigmoid(W_f.[h,x]+b_f), i = sigmoid(W_i.[h,x]+b_i),
    candidate = tanh(W_c.[h,x]+b_c), c = f*c_prev + i*candidate,
    o = sigmoid(W_o.[h,x]+b_o), h = o*tanh(c).

    Returns (h_t, c_t, GateCache).
    """
    x_t = np.asarray(x_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    if x_t.shape != (params.input_size,) or h_prev.shape != (params.hidden,):
        raise ValueError(
            f"cell expects input {params.input_size} and hidden {params.hidden}, "
            f"got {x_t.shape} and {h_prev.shape}"
        )
    z = np.concatenate([h_prev, x_t])
    f = _sigmoid(params.w_f @ z + params.b_f)
    i = _sigmoid(params.w_i @ z + params.b_i)
    candidate = np.tanh(params.w_c @ z + params.b_c)
    o = _sigmoid(params.w_o @ z + params.b_o)
    c_t = f * c_prev + i * candidate
    h_t = o * np.tanh(c_t)
    return h_t, c_t, GateCache(f, i, candidate, o, c_t, h_t)


def lstm_sequence_forward(window, params: LstmParams):
    """Run the cell over a window starting from h_0 = c_0 = 0.

    ``window`` has shape (steps, input_size) or (steps,) for univariate
    input.  Returns (hs, c_last) where hs has shape (steps, hidden).
    """
    window = _as_window(window, params.input_size)
    if window.shape[0] < 1:
        raise ValueError("empty window")
    hs, cs, _ = kernels.lstm_forward(window[None, :, :], *params.stacked())
    return hs[0], cs[0, -1, :]


def blstm_forward(window, fwd: LstmParams, bwd: LstmParams):
    """Forward and time-reversed passes; returns the last hidden state of each.

    The backward direction processes the window from its end to its start, so
    both returned states are aligned with the prediction instant.
    """
    if fwd.hidden != bwd.hidden:
        raise ValueError("direction cells must share hidden size")
    window = _as_window(window, fwd.input_size)
    h_fwd, _ = lstm_sequence_forward(window, fwd)
    h_bwd, _ = lstm_sequence_forward(window[::-1], bwd)
    return h_fwd[-1], h_bwd[-1]


def predict_head(h_fwd, h_bwd, head: DenseHead) -> float:
    """Linear readout of Eq.-style two-term form; identity activation."""
    h_fwd = np.asarray(h_fwd, dtype=float)
    if h_fwd.shape != head.w_forward.shape:
        raise ValueError("head/hidden shape mismatch")
    y = float(head.w_forward @ h_fwd) + float(head.bias[0])
    if head.w_backward is not None:
        if h_bwd is None:
            raise ValueError("BLSTM head needs a backward state")
        y += float(head.w_backward @ np.asarray(h_bwd, dtype=float))
    return y


def mse_loss(pred, target) -> float:
    """Mean squared error."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.size == 0:
        raise ValueError("predictions and targets must have equal nonzero length")
    diff = pred - target
    return float(np.mean(diff * diff))


def forward_batch(model: RecurrentModel, inputs, keep_caches: bool = False):
    """Kernel forward over a batch of windows, shape (batch, window).

    Returns (h_fwd_last, h_bwd_last, caches); caches is None unless requested
    and holds what :func:`powercast.training.bptt_gradients` needs.
    """
    x = np.ascontiguousarray(inputs, dtype=float)[:, :, None]
    w_f, b_f = model.forward_cell.stacked()
    hs_f, cs_f, g_f = kernels.lstm_forward(x, w_f, b_f)
    h_fwd = hs_f[:, -1, :]
    h_bwd = None
    caches = None
    if model.arch == ARCH_BLSTM:
        x_rev = np.ascontiguousarray(x[:, ::-1, :])
        w_b, b_b = model.backward_cell.stacked()
        hs_b, cs_b, g_b = kernels.lstm_forward(x_rev, w_b, b_b)
        h_bwd = hs_b[:, -1, :]
        if keep_caches:
            caches = {
                "x": x, "hs_f": hs_f, "cs_f": cs_f, "g_f": g_f, "w_f": w_f,
                "x_rev": x_rev, "hs_b": hs_b, "cs_b": cs_b, "g_b": g_b, "w_b": w_b,
            }
    elif keep_caches:
        caches = {"x": x, "hs_f": hs_f, "cs_f": cs_f, "g_f": g_f, "w_f": w_f}
    return h_fwd, h_bwd, caches


def predict_batch(model: RecurrentModel, inputs, chunk: int = 256) -> np.ndarray:
    """Scaled-space predictions for (n, window) inputs; dropout is inactive."""
    inputs = np.asarray(inputs, dtype=float)
    out = np.empty(inputs.shape[0])
    for lo in range(0, inputs.shape[0], chunk):
        h_fwd, h_bwd, _ = forward_batch(model, inputs[lo : lo + chunk])
        y = h_fwd @ model.head.w_forward + model.head.bias[0]
        if model.head.w_backward is not None:
            y = y + h_bwd @ model.head.w_backward
        out[lo : lo + chunk] = y
    return out


def _as_window(window, input_size: int) -> np.ndarray:
    window = np.asarray(window, dtype=float)
    if window.ndim == 1:
        window = window[:, None]
    if window.ndim != 2 or window.shape[1] != input_size:
        raise ValueError(f"window must have shape (steps, {input_size})")
    return np.ascontiguousarray(window)
