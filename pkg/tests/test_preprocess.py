"""Scaling and sliding-window framing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powercast.preprocess import MinMaxScaler, fit_scaler, frame_windows


class TestScaler:
    def test_fit_extrema(self):
        s = fit_scaler([2, 4, 6])
        assert (s.data_min, s.data_max) == (2.0, 6.0)

    def test_unit_range_is_identity_like(self):
        s = fit_scaler([0, 1])
        assert s.transform(0.25) == 0.25

    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            fit_scaler([5, 5, 5])

    def test_too_few_values_rejected(self):
        with pytest.raises(ValueError):
            fit_scaler([1.0])

    def test_transform_examples(self):
        s = MinMaxScaler(2, 6)
        assert s.transform(4) == 0.5
        assert s.transform(2) == 0.0
        assert s.transform(8) == 1.5  # out of range maps out of [0, 1], no clamp
        assert s.transform(0) == -0.5

    def test_train_values_map_into_unit_interval(self):
        values = np.random.default_rng(1).normal(10, 3, 200)
        s = fit_scaler(values)
        scaled = s.transform(values)
        assert scaled.min() == 0.0
        assert scaled.max() == 1.0
        assert ((scaled >= 0) & (scaled <= 1)).all()

    @given(
        lo=st.floats(-1e6, 1e6),
        span=st.floats(1e-6, 1e6),
        x=st.floats(-1e6, 1e6),
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip_is_identity(self, lo, span, x):
        s = MinMaxScaler(lo, lo + span)
        back = float(s.inverse_transform(s.transform(x)))
        assert abs(back - x) <= 1e-12 * max(1.0, abs(x), span)


class TestFrameWindows:
    def test_definition(self):
        ds = frame_windows([1.0, 2.0, 3.0, 4.0], 2)
        assert ds.inputs.tolist() == [[1.0, 2.0], [2.0, 3.0]]
        assert ds.targets.tolist() == [3.0, 4.0]
        assert ds.origin_index == 2

    def test_single_sample_boundary(self):
        ds = frame_windows(np.arange(91.0), 90)
        assert len(ds) == 1
        assert ds.targets[0] == 90.0

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            frame_windows([1.0, 2.0], 2)

    @given(st.integers(2, 200), st.integers(1, 50))
    @settings(max_examples=100, deadline=None)
    def test_sample_count_property(self, n, w):
        values = np.arange(float(n))
        if n <= w:
            with pytest.raises(ValueError):
                frame_windows(values, w)
            return
        ds = frame_windows(values, w)
        assert len(ds) == n - w
        # windows shadow the source: inputs[i] = values[i:i+w], target = values[i+w]
        i = len(ds) - 1
        assert ds.inputs[i].tolist() == values[i : i + w].tolist()
        assert ds.targets[i] == values[i + w]
