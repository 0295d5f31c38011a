"""Unit tests for performance monitoring utilities."""

import time
import unittest

import pytest

from src.utils.performance import (
    SHOT_METRICS,
    PerformanceMetrics,
    clear_metrics,
    get_all_metrics,
    get_metric_stats,
    record_shot_stats,
    summarize_metrics,
    timing_decorator,
)


class TestTimingDecorator(unittest.TestCase):
    """Tests for timing_decorator."""

    def setUp(self):
        clear_metrics()

    def test_timing_decorator_records(self):
        @timing_decorator(metric_name="test_func")
        def test_func():
            time.sleep(0.01)
            return "result"

        self.assertEqual(test_func(), "result")
        stats = get_metric_stats("test_func")
        self.assertEqual(stats["count"], 1)
        self.assertGreaterEqual(stats["mean"], 0.01)

    def test_default_name(self):
        @timing_decorator()
        def named():
            return 1

        named()
        self.assertIn(f"{named.__module__}.named", get_all_metrics())

    def test_errors_recorded_separately(self):
        @timing_decorator(metric_name="failing")
        def failing():
            raise ValueError("boom")

        with self.assertRaises(ValueError):
            failing()
        self.assertIsNone(get_metric_stats("failing"))
        self.assertEqual(get_metric_stats("failing_error")["count"], 1)


class TestPerformanceMetrics(unittest.TestCase):
    def setUp(self):
        clear_metrics()

    def test_context_manager(self):
        with PerformanceMetrics("block") as metric:
            time.sleep(0.01)
        self.assertGreaterEqual(metric.elapsed, 0.01)
        self.assertEqual(get_metric_stats("block")["count"], 1)

    def test_elapsed_before_start(self):
        self.assertEqual(PerformanceMetrics("idle").elapsed, 0.0)


def test_shot_stats_summary():
    clear_metrics()
    record_shot_stats(10, 2, 70, 0.5)
    record_shot_stats(30, 0, 190, 1.5)
    summary = summarize_metrics()
    assert list(summary) == sorted(SHOT_METRICS)
    assert summary["shot.steps_accepted"]["total"] == 40.0
    assert summary["shot.steps_rejected"]["max"] == 2.0
    assert summary["shot.seconds"]["mean"] == pytest.approx(1.0)
    clear_metrics()
    assert summarize_metrics() == {}
