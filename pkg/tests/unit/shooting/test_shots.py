"""Unit tests for the backward and forward shots."""

import unittest
from unittest.mock import patch

import numpy as np
import pytest

from src.model.config_schema_model import ShootConfig
from src.model.domain import FRAME_FAR, FRAME_NEAR, SAMPLE_COLUMNS, ModelParams
from src.model.exceptions import DomainError, NonEvaluableShotError
from src.services.solver_service import residual_from_record
from src.shooting import shoot_minus, shoot_plus
from src.shooting.shots import _landing_amplitude
from src.utils.performance import get_metric_stats


class TestShootMinus(unittest.TestCase):
    """Tests for the t < 0 backward shot."""

    def setUp(self):
        self.params = ModelParams(m=3.0, branch="minus")

    def test_record_layout(self):
        record = shoot_minus(self.params, 1.0)
        self.assertEqual(record.samples.shape[1], len(SAMPLE_COLUMNS))
        self.assertEqual(record.seed, 1.0)
        self.assertEqual(record.seed_kind, "x0")
        self.assertFalse(record.samples.flags.writeable)
        frames = record.samples[:, 1]
        self.assertEqual(frames[0], FRAME_FAR)
        self.assertIn(FRAME_NEAR, set(frames))

    def test_legs_run_backward_in_their_clocks(self):
        record = shoot_minus(self.params, 1.0)
        near = record.near_trajectory()
        self.assertTrue(np.all(np.diff(near[:, 0]) < 0.0))
        far = record.far_trace()
        self.assertTrue(np.all(np.diff(far[:, 0]) > 0.0))

    def test_termination_is_evaluable_with_state(self):
        record = shoot_minus(self.params, 0.4)
        term = record.termination
        self.assertTrue(term.evaluable)
        self.assertTrue(np.isfinite(term.xi))
        if term.kind == "HitU0":
            self.assertEqual(term.value, term.w)
        elif term.kind == "HitW0":
            self.assertEqual(term.value, term.u)

    def test_x_q_settles_at_origin(self):
        """Test that the stationary seed settles onto the origin with zero residual."""
        cfg = ShootConfig()
        record = shoot_minus(self.params, self.params.x_q, cfg)
        term = record.termination
        self.assertEqual(term.kind, "NearEquilibrium")
        self.assertLess(abs(term.xi), 1e-3)
        self.assertLessEqual(max(abs(term.u), abs(term.w)), cfg.eq_tol)
        self.assertEqual(residual_from_record(record), 0.0)

    def test_x_q_trajectory_stays_on_exact_solution(self):
        record = shoot_minus(self.params, self.params.x_q)
        near = record.near_trajectory()
        np.testing.assert_allclose(near[:, 1], self.params.x_q * near[:, 2] ** self.params.p)
        np.testing.assert_allclose(near[:, 3], near[:, 1])
        self.assertTrue(np.all(np.diff(near[:, 0]) < 0.0))

    def test_published_root_lands_without_stalling(self):
        """Test that a shot at the boundary settles near the published A and stays small."""
        cfg = ShootConfig()
        record = shoot_minus(self.params, 0.76661, cfg)
        term = record.termination
        self.assertTrue(term.evaluable)
        self.assertLess(abs(term.xi - 0.129), 2e-3)
        self.assertLess(max(term.u, abs(term.w)), 1e-3)
        if term.kind == "NearEquilibrium":
            self.assertLessEqual(term.u, cfg.eq_tol)

    def test_stats_recorded(self):
        record = shoot_minus(self.params, 1.0)
        self.assertGreater(record.stats.steps_accepted, 0)
        self.assertGreater(record.stats.rhs_evals, record.stats.steps_accepted)
        stats = get_metric_stats("shot.steps_accepted")
        self.assertIsNotNone(stats)
        self.assertEqual(stats["count"], 1)

    def test_rejections(self):
        with self.assertRaises(DomainError):
            shoot_minus(self.params.with_branch("plus"), 1.0)
        with self.assertRaises(DomainError):
            shoot_minus(self.params, 0.0)


class TestShootPlus(unittest.TestCase):
    """Tests for the t > 0 forward shot."""

    def setUp(self):
        self.params = ModelParams(m=3.0, branch="plus")

    def test_estimate_matches_record(self):
        estimate, record = shoot_plus(self.params, 0.5)
        self.assertEqual(record.x0_estimate, estimate)
        self.assertEqual(record.termination.kind, "ForwardReadout")
        self.assertEqual(record.termination.leg, "far")
        self.assertEqual(record.termination.value, estimate)
        self.assertEqual(record.seed_kind, "a_plus")
        self.assertGreater(estimate, 0.0)

    def test_forward_shot_keeps_w_and_z_positive(self):
        _, record = shoot_plus(self.params, 0.5)
        near = record.near_trajectory()
        self.assertTrue(np.all(near[:, 3] > 0.0))
        far = record.far_trace()
        self.assertTrue(np.all(far[:, 3] > 0.0))

    def test_rejections(self):
        with self.assertRaises(DomainError):
            shoot_plus(self.params, 0.0)
        with self.assertRaises(DomainError):
            shoot_plus(self.params.with_branch("minus"), 0.5)


@pytest.mark.parametrize("a_plus", [1e-4, -1e-4])
def test_small_a_plus_approaches_x_q(a_plus):
    params = ModelParams(m=3.0, branch="plus")
    estimate, _ = shoot_plus(params, a_plus)
    assert abs(estimate - params.x_q) < 1e-2


def test_estimate_increases_with_a_plus():
    """Test that a larger departure point ends further out in the far field."""
    params = ModelParams(m=3.0, branch="plus")
    low, _ = shoot_plus(params, 0.2)
    high, _ = shoot_plus(params, 0.8)
    assert high > low


def test_published_a_plus_reads_published_x0():
    params = ModelParams(m=3.0, branch="plus")
    estimate, record = shoot_plus(params, 0.154)
    assert record.termination.kind == "ForwardReadout"
    assert abs(estimate - 0.767) < 5e-3


def test_short_near_clock_is_not_a_readout():
    """Test that a forward shot cut off inside the near field raises instead of reading x0."""
    params = ModelParams(m=3.0, branch="plus")
    cfg = ShootConfig(tau_inf=1e3)
    with patch("src.shooting.shots.ESCAPE_MARGIN", 0.0):
        with pytest.raises(NonEvaluableShotError) as excinfo:
            shoot_plus(params, 0.154, cfg)
    assert excinfo.value.details["kind"] == "BudgetExhausted"
    record = excinfo.value.record
    assert record.termination.leg == "near"
    assert record.termination.xi < cfg.switch_xi


def test_landing_amplitude_projects_remaining_decay():
    params = ModelParams(m=3.0, branch="minus")
    xi, u, w = 1.0, 1e-3, 1e-10
    k = params.p * xi
    landed = _landing_amplitude(params, xi, u, w)
    assert u - w / k < landed < u
    assert _landing_amplitude(params, xi, u, 0.0) == u
    assert _landing_amplitude(params, -0.5, u, w) == u
