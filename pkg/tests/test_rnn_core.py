"""LSTM cell math, bidirectional wiring, heads, and the sequence kernels."""

import numpy as np
import pytest

from powercast.kernels import available_backends
from powercast.model import (
    DenseHead,
    LstmParams,
    blstm_forward,
    lstm_cell_forward,
    lstm_sequence_forward,
    mse_loss,
    predict_head,
)

BACKENDS = available_backends()


def make_params(hidden, input_size, rng=None, scale=0.5):
    if rng is None:
        mats = [np.zeros((hidden, hidden + input_size)) for _ in range(4)]
        vecs = [np.zeros(hidden) for _ in range(4)]
    else:
        mats = [scale * rng.standard_normal((hidden, hidden + input_size)) for _ in range(4)]
        vecs = [scale * rng.standard_normal(hidden) for _ in range(4)]
    return LstmParams(*mats, *vecs)


def run_cells(window, params):
    """Step-by-step oracle built from the single-cell op."""
    window = np.asarray(window, dtype=float).reshape(len(window), -1)
    h = np.zeros(params.hidden)
    c = np.zeros(params.hidden)
    hs = []
    for x_t in window:
        h, c, _ = lstm_cell_forward(x_t, h, c, params)
        hs.append(h)
    return np.array(hs), c


class TestCellForward:
    def test_zero_parameters(self):
        p = make_params(3, 1)
        h, c, cache = lstm_cell_forward([0.7], np.zeros(3), np.zeros(3), p)
        assert np.allclose(cache.f, 0.5) and np.allclose(cache.i, 0.5)
        assert np.allclose(cache.o, 0.5)
        assert np.allclose(cache.candidate, 0.0)
        assert np.allclose(c, 0.0) and np.allclose(h, 0.0)

    def test_carried_cell_state_scalar(self):
        p = make_params(1, 1)
        h, c, _ = lstm_cell_forward([0.0], np.zeros(1), np.ones(1), p)
        assert c[0] == pytest.approx(0.5, abs=1e-12)
        assert h[0] == pytest.approx(0.5 * np.tanh(0.5), abs=1e-12)
        assert h[0] == pytest.approx(0.231059, abs=1e-6)

    def test_saturated_forget_gate_discards_memory(self):
        p = make_params(1, 1)
        p.w_f[0] = [0.0, 10.0]
        p.b_f[0] = -100.0
        h, c, cache = lstm_cell_forward([0.5], np.zeros(1), np.ones(1), p)
        assert cache.f[0] < 1e-40
        assert abs(c[0]) < 1e-40
        assert abs(h[0]) < 1e-40

    def test_gate_ranges(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = make_params(4, 2, rng, scale=3.0)
            h, c, cache = lstm_cell_forward(
                rng.standard_normal(2), rng.standard_normal(4), rng.standard_normal(4), p
            )
            for gate in (cache.f, cache.i, cache.o):
                assert ((gate > 0) & (gate < 1)).all()
            assert ((cache.candidate > -1) & (cache.candidate < 1)).all()

    def test_cell_update_limit_cases(self):
        rng = np.random.default_rng(6)
        p = make_params(2, 1, rng)
        c_prev = rng.standard_normal(2)
        # forget ~ 1, input ~ 0: memory carried through unchanged
        p.b_f[:] = 100.0
        p.b_i[:] = -100.0
        _, c, _ = lstm_cell_forward([0.3], np.zeros(2), c_prev, p)
        assert np.allclose(c, c_prev, atol=1e-12)
        # forget ~ 0: memory replaced by gated candidate
        p.b_f[:] = -100.0
        p.b_i[:] = 0.0
        _, c, cache = lstm_cell_forward([0.3], np.zeros(2), c_prev, p)
        assert np.allclose(c, cache.i * cache.candidate, atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        p = make_params(2, 1)
        with pytest.raises(ValueError):
            lstm_cell_forward([0.1, 0.2], np.zeros(2), np.zeros(2), p)


class TestSequenceForward:
    def test_single_step_reduces_to_cell(self):
        rng = np.random.default_rng(7)
        p = make_params(3, 1, rng)
        x = rng.standard_normal(1)
        hs, c_last = lstm_sequence_forward(x[None, :], p)
        h_cell, c_cell, _ = lstm_cell_forward(x, np.zeros(3), np.zeros(3), p)
        assert np.allclose(hs[0], h_cell, atol=1e-12)
        assert np.allclose(c_last, c_cell, atol=1e-12)

    def test_zero_parameters_give_zero_states(self):
        p = make_params(2, 1)
        hs, c_last = lstm_sequence_forward(np.random.default_rng(0).random(5), p)
        assert np.allclose(hs, 0.0) and np.allclose(c_last, 0.0)

    def test_matches_composed_cell_oracle(self):
        rng = np.random.default_rng(8)
        p = make_params(1, 1, rng)
        window = rng.standard_normal((3, 1))
        hs, c_last = lstm_sequence_forward(window, p)
        hs_ref, c_ref = run_cells(window, p)
        assert np.allclose(hs, hs_ref, atol=1e-12)
        assert np.allclose(c_last, c_ref, atol=1e-12)

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            lstm_sequence_forward(np.empty((0, 1)), make_params(2, 1))


class TestBlstmForward:
    def test_palindromic_window_with_shared_cells(self):
        rng = np.random.default_rng(9)
        p = make_params(3, 1, rng)
        window = np.array([[0.1], [0.7], [0.1]])
        h_fwd, h_bwd = blstm_forward(window, p, p)
        assert np.allclose(h_fwd, h_bwd, atol=1e-15)

    def test_zero_parameters(self):
        h_fwd, h_bwd = blstm_forward(np.ones((4, 1)), make_params(2, 1), make_params(2, 1))
        assert np.allclose(h_fwd, 0.0) and np.allclose(h_bwd, 0.0)

    def test_backward_direction_equals_oracle_on_reversed_window(self):
        rng = np.random.default_rng(10)
        fwd = make_params(1, 1, rng)
        bwd = make_params(1, 1, rng)
        window = rng.standard_normal((3, 1))
        _, h_bwd = blstm_forward(window, fwd, bwd)
        hs_ref, _ = run_cells(window[::-1], bwd)
        assert np.allclose(h_bwd, hs_ref[-1], atol=1e-12)

    def test_hidden_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            blstm_forward(np.ones((2, 1)), make_params(2, 1), make_params(3, 1))


class TestPredictHead:
    def test_zero_head(self):
        head = DenseHead(np.zeros(3), None, np.zeros(1))
        assert predict_head(np.ones(3), None, head) == 0.0

    def test_bias_only(self):
        head = DenseHead(np.zeros(2), None, np.array([1.25]))
        assert predict_head(np.ones(2), None, head) == 1.25

    def test_two_term_dot_product(self):
        head = DenseHead(np.array([0.5, -0.25]), np.array([1.0, 2.0]), np.array([0.1]))
        y = predict_head(np.array([0.2, 0.4]), np.array([0.3, -0.1]), head)
        assert y == pytest.approx(0.5 * 0.2 - 0.25 * 0.4 + 1.0 * 0.3 + 2.0 * (-0.1) + 0.1)

    def test_missing_backward_state_rejected(self):
        head = DenseHead(np.ones(2), np.ones(2), np.zeros(1))
        with pytest.raises(ValueError):
            predict_head(np.ones(2), None, head)


class TestMseLoss:
    def test_perfect(self):
        assert mse_loss([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_unit(self):
        assert mse_loss([0.0], [1.0]) == 1.0

    def test_hand_computed(self):
        assert mse_loss([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == pytest.approx(2.0 / 3.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mse_loss([1.0], [1.0, 2.0])


class TestKernels:
    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_forward_matches_cell_composition(self, name):
        mod = BACKENDS[name]
        rng = np.random.default_rng(11)
        hidden, isize, steps, batch = 3, 1, 5, 4
        p = make_params(hidden, isize, rng)
        w, b = p.stacked()
        x = rng.standard_normal((batch, steps, isize))
        hs, cs, gates = mod.lstm_forward(x, w, b)
        for s in range(batch):
            hs_ref, c_ref = run_cells(x[s], p)
            assert np.allclose(hs[s], hs_ref, atol=1e-12)
            assert np.allclose(cs[s, -1], c_ref, atol=1e-12)
        assert gates.shape == (batch, steps, 4 * hidden)

    @pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
    def test_backends_agree(self):
        rng = np.random.default_rng(12)
        for hidden in (1, 4, 17):
            batch, steps = 6, 8
            x = rng.standard_normal((batch, steps, 1))
            w = rng.standard_normal((4 * hidden, hidden + 1)) * 0.6
            b = rng.standard_normal(4 * hidden) * 0.2
            dh = rng.standard_normal((batch, hidden))
            outs = {}
            for name, mod in BACKENDS.items():
                hs, cs, g = mod.lstm_forward(x, w, b)
                dw, db = mod.lstm_backward(x, w, hs, cs, g, dh)
                outs[name] = (hs, cs, g, dw, db)
            for a, b_ in zip(outs["numpy"], outs["cython"]):
                assert np.allclose(a, b_, rtol=1e-10, atol=1e-12)
