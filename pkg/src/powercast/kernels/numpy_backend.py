"""Pure-NumPy LSTM sequence kernels.

Reference implementation of the hot training loops; the compiled backend in
``_core.pyx`` mirrors these semantics exactly.  Both operate on stacked gate
parameters: weight rows are ordered [forget, input, cell, output] and act on
the concatenation [h_prev, x_t].
"""

from __future__ import annotations

import numpy as np


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def lstm_forward(x, w, b):
    """Run an LSTM over a batch of windows, keeping per-step caches.

    Args:
        x: inputs, shape (batch, steps, input_size), float64.
        w: stacked gate weights, shape (4*hidden, hidden + input_size).
        b: stacked gate biases, shape (4*hidden,).

    Returns:
        (hs, cs, gates) where hs and cs have shape (batch, steps, hidden) and
        gates has shape (batch, steps, 4*hidden) holding the post-activation
        gate values [f, i, candidate, o] needed for backpropagation.
    """
    batch, steps, _ = x.shape
    hidden = w.shape[0] // 4
    hs = np.empty((batch, steps, hidden))
    cs = np.empty((batch, steps, hidden))
    gates = np.empty((batch, steps, 4 * hidden))

    wt = np.ascontiguousarray(w.T)
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    for t in range(steps):
        z = np.concatenate([h, x[:, t, :]], axis=1)
        a = z @ wt + b
        f = _sigmoid(a[:, :hidden])
        i = _sigmoid(a[:, hidden : 2 * hidden])
        cand = np.tanh(a[:, 2 * hidden : 3 * hidden])
        o = _sigmoid(a[:, 3 * hidden :])
        c = f * c + i * cand
        h = o * np.tanh(c)
        gates[:, t, :hidden] = f
        gates[:, t, hidden : 2 * hidden] = i
        gates[:, t, 2 * hidden : 3 * hidden] = cand
        gates[:, t, 3 * hidden :] = o
        hs[:, t, :] = h
        cs[:, t, :] = c
    return hs, cs, gates


def lstm_backward(x, w, hs, cs, gates, dh_last):
    """Backpropagate through time from a gradient on the final hidden state.

    Args:
        x, w: as passed to :func:`lstm_forward`.
        hs, cs, gates: caches returned by :func:`lstm_forward`.
        dh_last: gradient of the loss w.r.t. the last hidden state,
            shape (batch, hidden).

    Returns:
        (dw, db) with the same shapes as ``w`` and ``b``.
    """
    batch, steps, _ = x.shape
    hidden = w.shape[0] // 4
    dw = np.zeros_like(w)
    db = np.zeros(4 * hidden)

    dh = dh_last.copy()
    dc = np.zeros((batch, hidden))
    zeros = np.zeros((batch, hidden))
    for t in range(steps - 1, -1, -1):
        f = gates[:, t, :hidden]
        i = gates[:, t, hidden : 2 * hidden]
        cand = gates[:, t, 2 * hidden : 3 * hidden]
        o = gates[:, t, 3 * hidden :]
        c_prev = cs[:, t - 1, :] if t > 0 else zeros
        h_prev = hs[:, t - 1, :] if t > 0 else zeros

        tanh_c = np.tanh(cs[:, t, :])
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
        df = dc * c_prev
        di = dc * cand
        dcand = dc * i

        # pre-activation gradients, stacked in gate order
        da = np.concatenate(
            [
                df * f * (1.0 - f),
                di * i * (1.0 - i),
                dcand * (1.0 - cand * cand),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        z = np.concatenate([h_prev, x[:, t, :]], axis=1)
        dw += da.T @ z
        db += da.sum(axis=0)
        dz = da @ w
        dh = dz[:, :hidden]
        dc = dc * f
    return dw, db
