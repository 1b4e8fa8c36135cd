"""Evaluation metrics, ACF, and the summary-table layout."""

import statistics

import numpy as np
import pytest

from powercast.metrics import (
    MetricReport,
    acf,
    compute_metrics,
    format_metric_table,
    summarize_reports,
)


class TestComputeMetrics:
    def test_hand_computed_example(self):
        r = compute_metrics([1.0, 2.0, 3.0], [2.0, 2.0, 2.0])
        assert r.rmse == pytest.approx(0.816497, abs=1e-6)
        assert r.nrmse == pytest.approx(0.408248, abs=1e-6)
        assert r.mae == pytest.approx(0.666667, abs=1e-6)
        assert r.mape_pct == pytest.approx(44.4444, abs=1e-4)
        assert r.r2_pct == pytest.approx(0.0, abs=1e-12)
        assert r.n_used_mape == 3

    def test_perfect_forecast(self):
        actual = np.array([3.0, 5.0, 7.0])
        r = compute_metrics(actual, actual.copy())
        assert (r.rmse, r.nrmse, r.mae, r.mape_pct) == (0.0, 0.0, 0.0, 0.0)
        assert r.r2_pct == 100.0

    def test_predicting_the_mean_gives_zero_r2(self):
        actual = np.array([1.0, 4.0, 2.5, 0.5])
        r = compute_metrics(actual, np.full(4, actual.mean()))
        assert r.r2_pct == pytest.approx(0.0, abs=1e-10)

    def test_negative_r2_is_allowed(self):
        r = compute_metrics([1.0, 2.0, 3.0], [10.0, -10.0, 10.0])
        assert r.r2_pct < 0.0

    def test_constant_actual_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            compute_metrics([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_mape_zero_exclusion(self):
        r = compute_metrics([0.0, 1.0, 2.0], [0.5, 1.5, 2.5])
        assert r.n_used_mape == 2
        assert r.mape_pct == pytest.approx(100.0 * (0.5 / 1 + 0.25) / 2)

    def test_all_points_excluded_rejected(self):
        with pytest.raises(ValueError, match="MAPE"):
            compute_metrics([1e-12, -1e-12], [1.0, 2.0])

    def test_rmse_dominates_mae(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            actual = rng.normal(5, 2, 30)
            predicted = actual + rng.normal(0, 1, 30)
            r = compute_metrics(actual, predicted)
            assert r.rmse >= r.mae >= 0.0

    def test_rmse_equals_mae_for_equal_absolute_errors(self):
        r = compute_metrics([1.0, 3.0], [2.0, 2.0])
        assert r.rmse == pytest.approx(r.mae, rel=1e-12)

    def test_scale_covariance(self):
        rng = np.random.default_rng(1)
        actual = rng.uniform(1, 10, 50)
        predicted = actual + rng.normal(0, 0.5, 50)
        base = compute_metrics(actual, predicted)
        for c in (0.01, 3.7, 1e4):
            scaled = compute_metrics(c * actual, c * predicted)
            assert scaled.rmse == pytest.approx(c * base.rmse, rel=1e-9)
            assert scaled.mae == pytest.approx(c * base.mae, rel=1e-9)
            assert scaled.nrmse == pytest.approx(base.nrmse, rel=1e-9)
            assert scaled.mape_pct == pytest.approx(base.mape_pct, rel=1e-9)
            assert scaled.r2_pct == pytest.approx(base.r2_pct, rel=1e-9)


class TestAcf:
    def test_hand_computed_lag_one(self):
        result = acf([1.0, 2.0, 3.0, 4.0], 1)
        assert result.coefficients[1] == pytest.approx(0.25, abs=1e-12)

    def test_lag_zero_is_one(self):
        result = acf(np.random.default_rng(2).random(40), 5)
        assert result.coefficients[0] == 1.0

    def test_alternating_series_is_strongly_negative(self):
        x = np.tile([1.0, -1.0], 50)
        result = acf(x, 1)
        # mean is 0, so r_1 = -(n-1)/n = -0.99 exactly
        assert result.coefficients[1] == pytest.approx(-0.99, abs=1e-12)

    def test_coefficients_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            result = acf(rng.normal(size=60), 20)
            assert (np.abs(result.coefficients) <= 1.0 + 1e-12).all()

    def test_significance_bound(self):
        result = acf(np.random.default_rng(4).random(400), 10)
        assert result.significance_bound == pytest.approx(1.96 / 20.0)
        assert list(result.lags) == list(range(11))

    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            acf(np.ones(50), 3)

    def test_lag_bounds_enforced(self):
        with pytest.raises(ValueError):
            acf([1.0, 2.0], 2)


def make_reports(rng, n=10):
    reports = []
    for _ in range(n):
        actual = rng.uniform(1, 5, 40)
        predicted = actual + rng.normal(0, 0.4, 40)
        reports.append(compute_metrics(actual, predicted))
    return reports


class TestSummaries:
    def test_table_layout(self):
        reports = make_reports(np.random.default_rng(5))
        table = format_metric_table(reports)
        lines = table.strip().splitlines()
        assert lines[0] == "model,rmse,nrmse,mae,mape_pct,r2_pct"
        assert len(lines) == 1 + 10 + 5
        assert [ln.split(",")[0] for ln in lines[11:]] == [
            "Average", "Median", "St-Dev", "Min", "Max",
        ]

    def test_summary_against_independent_oracle(self):
        reports = make_reports(np.random.default_rng(6))
        summary = summarize_reports(reports)
        rmses = [r.rmse for r in reports]
        assert summary["Average"]["rmse"] == pytest.approx(statistics.fmean(rmses), abs=1e-9)
        assert summary["Median"]["rmse"] == pytest.approx(statistics.median(rmses), abs=1e-9)
        assert summary["St-Dev"]["rmse"] == pytest.approx(statistics.stdev(rmses), abs=1e-9)
        assert summary["Min"]["rmse"] == min(rmses)
        assert summary["Max"]["rmse"] == max(rmses)

    def test_identical_reports_have_zero_spread(self):
        report = MetricReport(1.0, 0.1, 0.8, 12.0, 90.0, 40)
        summary = summarize_reports([report] * 10)
        assert summary["St-Dev"]["rmse"] == 0.0
        assert summary["Min"]["nrmse"] == summary["Max"]["nrmse"] == 0.1
