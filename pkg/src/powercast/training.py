"""Training loop: BPTT gradients, RMSProp updates, seeded minibatch descent."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .model import (
    ARCH_BLSTM,
    ARCH_LSTM,
    DenseHead,
    LstmParams,
    RecurrentModel,
    forward_batch,
    predict_batch,
)
from .preprocess import MinMaxScaler, WindowedDataset


class TrainingDivergedError(RuntimeError):
    """Loss became nonfinite during training."""


@dataclass(frozen=True)
class Hyper:
    """Training hyperparameters; defaults follow the experiment protocol."""

    hidden: int = 100
    epochs: int = 100
    batch: int = 32
    dropout: float = 0.3
    window: int = 90
    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-7
    seed: int = 0

    def with_seed(self, seed: int) -> "Hyper":
        return replace(self, seed=seed)


@dataclass
class OptimState:
    """Per-parameter running mean of squared gradients."""

    acc: dict
    step: int = 0


def init_optim_state(params: dict) -> OptimState:
    return OptimState(acc={k: np.zeros_like(v) for k, v in params.items()})


def rmsprop_step(params: dict, grads: dict, state: OptimState,
                 lr: float, rho: float, eps: float) -> OptimState:
    """In-place RMSProp update: acc <- rho*acc + (1-rho)*g^2; p -= lr*g/(sqrt(acc)+eps)."""
    for key, p in params.items():
        g = grads[key]
        if not np.all(np.isfinite(g)):
            raise ValueError(f"nonfinite gradient for {key}")
        acc = state.acc[key]
        acc *= rho
        acc += (1.0 - rho) * g * g
        p -= lr * g / (np.sqrt(acc) + eps)
    state.step += 1
    return state


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _init_cell(rng: np.random.Generator, hidden: int, input_size: int) -> LstmParams:
    # recurrent blocks orthogonal, input blocks uniform Glorot,
    # biases zero except forget gate at 1 (eases long-memory learning)
    limit = np.sqrt(6.0 / (input_size + hidden))
    weights = []
    for _ in range(4):
        rec = _orthogonal(rng, hidden)
        inp = rng.uniform(-limit, limit, size=(hidden, input_size))
        weights.append(np.concatenate([rec, inp], axis=1))
    w_f, w_i, w_c, w_o = weights
    zeros = np.zeros(hidden)
    return LstmParams(w_f, w_i, w_c, w_o,
                      b_f=np.ones(hidden), b_i=zeros.copy(),
                      b_c=zeros.copy(), b_o=zeros.copy())


def init_model(arch: str, hyper: Hyper, scaler: Optional[MinMaxScaler] = None,
               provenance: Optional[dict] = None, input_size: int = 1) -> RecurrentModel:
    """Fresh model with seeded initialization (deterministic draw order)."""
    rng = np.random.default_rng(hyper.seed)
    fwd = _init_cell(rng, hyper.hidden, input_size)
    bwd = _init_cell(rng, hyper.hidden, input_size) if arch == ARCH_BLSTM else None
    limit = np.sqrt(6.0 / (hyper.hidden + 1))
    w_forward = rng.uniform(-limit, limit, size=hyper.hidden)
    w_backward = rng.uniform(-limit, limit, size=hyper.hidden) if arch == ARCH_BLSTM else None
    head = DenseHead(w_forward, w_backward, bias=np.zeros(1))
    return RecurrentModel(
        arch=arch, hidden=hyper.hidden, window=hyper.window,
        forward_cell=fwd, backward_cell=bwd, head=head,
        dropout_rate=hyper.dropout, scaler=scaler, seed=hyper.seed,
        provenance=dict(provenance or {}),
    )


def _unstack_cell_grads(dw: np.ndarray, db: np.ndarray, hidden: int, prefix: str) -> dict:
    names = ("w_f", "w_i", "w_c", "w_o")
    grads = {f"{prefix}.{name}": dw[j * hidden : (j + 1) * hidden] for j, name in enumerate(names)}
    bnames = ("b_f", "b_i", "b_c", "b_o")
    grads.update({f"{prefix}.{name}": db[j * hidden : (j + 1) * hidden] for j, name in enumerate(bnames)})
    return grads


def bptt_gradients(inputs, targets, model: RecurrentModel, dropout_mask=None):
    """Exact gradients of the batch-mean MSE w.r.t. every parameter.

    ``dropout_mask`` is an inverted-dropout mask of shape (batch, hidden) for
    LSTM or (batch, 2*hidden) for BLSTM, applied to the cell outputs feeding
    the head (training only).  Returns (grads, loss).
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.shape[0] == 0:
        raise ValueError("empty batch")
    batch = inputs.shape[0]
    hidden = model.hidden

    h_fwd, h_bwd, caches = forward_batch(model, inputs, keep_caches=True)
    if dropout_mask is not None:
        mask_f = dropout_mask[:, :hidden]
        h_fwd_used = h_fwd * mask_f
    else:
        mask_f = None
        h_fwd_used = h_fwd

    preds = h_fwd_used @ model.head.w_forward + model.head.bias[0]
    if model.arch == ARCH_BLSTM:
        if dropout_mask is not None:
            mask_b = dropout_mask[:, hidden:]
            h_bwd_used = h_bwd * mask_b
        else:
            mask_b = None
            h_bwd_used = h_bwd
        preds = preds + h_bwd_used @ model.head.w_backward

    diff = preds - targets
    loss = float(np.mean(diff * diff))
    if not np.isfinite(loss):
        raise TrainingDivergedError("nonfinite training loss")

    dpred = 2.0 * diff / batch
    grads = {
        "head.w_forward": h_fwd_used.T @ dpred,
        "head.bias": np.array([dpred.sum()]),
    }

    dh_f = dpred[:, None] * model.head.w_forward[None, :]
    if mask_f is not None:
        dh_f = dh_f * mask_f
    dw, db = kernels.lstm_backward(
        caches["x"], caches["w_f"], caches["hs_f"], caches["cs_f"], caches["g_f"], dh_f
    )
    grads.update(_unstack_cell_grads(dw, db, hidden, "fwd"))

    if model.arch == ARCH_BLSTM:
        grads["head.w_backward"] = h_bwd_used.T @ dpred
        dh_b = dpred[:, None] * model.head.w_backward[None, :]
        if mask_b is not None:
            dh_b = dh_b * mask_b
        dw_b, db_b = kernels.lstm_backward(
            caches["x_rev"], caches["w_b"], caches["hs_b"], caches["cs_b"], caches["g_b"], dh_b
        )
        grads.update(_unstack_cell_grads(dw_b, db_b, hidden, "bwd"))
    return grads, loss


def train(arch: str, dataset: WindowedDataset, hyper: Hyper,
          scaler: Optional[MinMaxScaler] = None,
          provenance: Optional[dict] = None) -> RecurrentModel:
    """Seeded minibatch training; returns the model with per-epoch losses attached.

    Shuffles sample order each epoch, draws a fresh dropout mask per batch,
    and updates with RMSProp.  epochs=0 returns the initialized model.
    """
    if len(dataset) == 0:
        raise ValueError("empty training set")
    if dataset.window_len != hyper.window:
        raise ValueError(
            f"dataset window {dataset.window_len} != hyperparameter window {hyper.window}"
        )
    model = init_model(arch, hyper, scaler=scaler, provenance=provenance)
    rng = np.random.default_rng((hyper.seed, 1))  # stream distinct from init_model's
    params = model.parameters()
    state = init_optim_state(params)
    n = len(dataset)
    directions = 2 if arch == ARCH_BLSTM else 1

    for epoch in range(hyper.epochs):
        order = rng.permutation(n)
        sq_err_sum = 0.0
        for lo in range(0, n, hyper.batch):
            idx = order[lo : lo + hyper.batch]
            batch_inputs = dataset.inputs[idx]
            batch_targets = dataset.targets[idx]
            mask = None
            if hyper.dropout > 0.0:
                keep = rng.random((idx.size, directions * hyper.hidden)) >= hyper.dropout
                mask = keep / (1.0 - hyper.dropout)
            try:
                grads, loss = bptt_gradients(batch_inputs, batch_targets, model, mask)
            except TrainingDivergedError as exc:
                raise TrainingDivergedError(
                    f"{exc} (epoch {epoch + 1}, batch starting at {lo})"
                ) from None
            rmsprop_step(params, grads, state, hyper.lr, hyper.rho, hyper.eps)
            sq_err_sum += loss * idx.size
        model.epoch_losses.append(sq_err_sum / n)
    return model


def predict_holdout(model: RecurrentModel, full_series, holdout_start: int) -> np.ndarray:
    """One-step-ahead predictions in physical units for every holdout index.

    Each prediction is conditioned on the true previous ``model.window``
    observations, scaled with the model's own scaler, then inverse-transformed.
    ``full_series`` may be a TimeSeries or a plain value array covering both
    the history and the holdout.
    """
    values = np.asarray(getattr(full_series, "values", full_series), dtype=float)
    window = model.window
    if holdout_start < window:
        raise ValueError(f"holdout start {holdout_start} leaves fewer than {window} history points")
    if holdout_start >= values.size:
        raise ValueError("holdout start beyond end of series")
    if model.scaler is None:
        raise ValueError("model has no scaler attached")
    scaled = model.scaler.transform(values)
    windows = np.lib.stride_tricks.sliding_window_view(scaled, window)
    inputs = windows[holdout_start - window : values.size - window]
    preds_scaled = predict_batch(model, np.ascontiguousarray(inputs))
    return model.scaler.inverse_transform(preds_scaled)
