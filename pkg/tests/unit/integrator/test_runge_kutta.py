"""Unit tests for the embedded Runge-Kutta integrator."""

import math
import unittest

import numpy as np
import pytest

from src.integrator import (
    EventSpec,
    IntegrationStats,
    OdeProblem,
    hermite_interpolate,
    integrate,
    step_embedded,
)
from src.model.config_schema_model import IntegrationConfig
from src.model.exceptions import DomainError, NonFiniteStepError


def decay_problem(direction: str = "forward") -> OdeProblem:
    return OdeProblem(dimension=1, rhs=lambda t, y: -y, direction=direction)


def oscillator_problem() -> OdeProblem:
    return OdeProblem(dimension=2, rhs=lambda t, y: np.array([y[1], -y[0]]))


def falling_problem() -> OdeProblem:
    return OdeProblem(dimension=2, rhs=lambda t, y: np.array([y[1], -1.0]))


class TestClosedFormSolutions(unittest.TestCase):
    """Global error against closed-form solutions."""

    def test_exponential_decay(self):
        """Test y' = -y reaches exp(-1) within ten times the tolerance."""
        config = IntegrationConfig(rtol=1e-10, atol=1e-10)
        outcome = integrate(decay_problem(), [1.0], 0.0, 1.0, config)
        self.assertEqual(outcome.status, "ReachedTEnd")
        self.assertEqual(outcome.final_t, 1.0)
        self.assertLess(abs(outcome.final_y[0] - math.exp(-1.0)), 1e-9)

    def test_harmonic_oscillator_full_period(self):
        """Test the oscillator returns to its start after 2 pi."""
        config = IntegrationConfig(rtol=1e-10, atol=1e-10)
        outcome = integrate(oscillator_problem(), [0.0, 1.0], 0.0, 2.0 * math.pi, config)
        self.assertEqual(outcome.status, "ReachedTEnd")
        np.testing.assert_allclose(outcome.final_y, [0.0, 1.0], atol=1e-8)

    def test_backward_direction(self):
        """Test y' = y integrated backward from t = 1 to t = 0."""
        problem = OdeProblem(dimension=1, rhs=lambda t, y: y, direction="backward")
        config = IntegrationConfig(rtol=1e-10, atol=1e-10)
        outcome = integrate(problem, [math.e], 1.0, 0.0, config)
        self.assertEqual(outcome.status, "ReachedTEnd")
        self.assertEqual(outcome.final_t, 0.0)
        self.assertLess(abs(outcome.final_y[0] - 1.0), 1e-9)
        self.assertTrue(np.all(np.diff(outcome.t) < 0.0))

    def test_samples_cover_the_run(self):
        """Test samples start at t0 and are ordered along the clock."""
        outcome = integrate(decay_problem(), [1.0], 0.0, 3.0)
        self.assertEqual(outcome.t[0], 0.0)
        self.assertTrue(np.all(np.diff(outcome.t) > 0.0))
        self.assertEqual(len(outcome.samples), len(outcome.t))


class TestEvents(unittest.TestCase):
    """Tests for event detection and localisation."""

    def test_event_time_matches_analytic_value(self):
        """Test the landing of a falling body at t = sqrt(2)."""
        ground = EventSpec(g=lambda t, y: y[0], direction="decreasing", label="ground")
        outcome = integrate(falling_problem(), [1.0, 0.0], 0.0, 10.0, events=[ground])
        self.assertEqual(outcome.status, "EventHit")
        self.assertEqual(outcome.event.label, "ground")
        self.assertLess(abs(outcome.event.t - math.sqrt(2.0)), 1e-9)
        self.assertLess(abs(outcome.event.y[0]), 1e-9)
        self.assertEqual(outcome.final_t, outcome.event.t)

    def test_direction_filter(self):
        """Test that increasing and decreasing crossings fire at different times."""
        down = EventSpec(g=lambda t, y: y[0], direction="decreasing", label="down")
        up = EventSpec(g=lambda t, y: y[0], direction="increasing", label="up")
        first_down = integrate(oscillator_problem(), [0.0, 1.0], 0.0, 10.0, events=[down])
        first_up = integrate(oscillator_problem(), [0.0, 1.0], 0.0, 10.0, events=[up])
        self.assertLess(abs(first_down.event.t - math.pi), 1e-9)
        self.assertLess(abs(first_up.event.t - 2.0 * math.pi), 1e-9)

    def test_earliest_terminal_event_wins(self):
        """Test that of two terminal events the one crossed first stops the run."""
        late = EventSpec(g=lambda t, y: t - 0.75, direction="increasing", label="late")
        early = EventSpec(g=lambda t, y: t - 0.5, direction="increasing", label="early")
        config = IntegrationConfig(h_init=1.0, h_max=1.0)
        outcome = integrate(decay_problem(), [1.0], 0.0, 2.0, config, events=[late, early])
        self.assertEqual(outcome.event.label, "early")
        self.assertLess(abs(outcome.event.t - 0.5), 1e-9)

    def test_non_terminal_events_are_logged(self):
        """Test that non-terminal crossings are logged without stopping."""
        zero = EventSpec(g=lambda t, y: y[0], terminal=False, label="zero")
        outcome = integrate(oscillator_problem(), [0.0, 1.0], 0.0, 10.0, events=[zero])
        self.assertEqual(outcome.status, "ReachedTEnd")
        times = [hit.t for hit in outcome.event_log]
        self.assertEqual(len(times), 3)
        np.testing.assert_allclose(times, [math.pi, 2.0 * math.pi, 3.0 * math.pi], atol=1e-9)

    def test_backward_event(self):
        """Test event detection while the clock runs backward."""
        problem = OdeProblem(dimension=1, rhs=lambda t, y: np.array([1.0]), direction="backward")
        half = EventSpec(g=lambda t, y: y[0] - 0.5, direction="decreasing", label="half")
        outcome = integrate(problem, [1.0], 1.0, None, events=[half])
        self.assertEqual(outcome.status, "EventHit")
        self.assertLess(abs(outcome.event.t - 0.5), 1e-9)

    def test_event_time_is_stable_under_tighter_tolerance(self):
        """Test that a tenfold tighter event tolerance moves t* by less than the tolerance."""
        down = EventSpec(g=lambda t, y: y[0], direction="decreasing", label="down")
        loose = IntegrationConfig(rtol=1e-10, atol=1e-10, event_tol=1e-9)
        tight = loose.model_copy(update={"event_tol": 1e-10})
        first = integrate(oscillator_problem(), [0.0, 1.0], 0.0, 10.0, loose, [down])
        second = integrate(oscillator_problem(), [0.0, 1.0], 0.0, 10.0, tight, [down])
        self.assertLess(abs(first.event.t - second.event.t), loose.event_tol)
        self.assertLess(abs(second.event.y[0]), 1e-9)

    def test_forward_then_backward_returns_to_start(self):
        config = IntegrationConfig(rtol=1e-10, atol=1e-10)
        forward = integrate(oscillator_problem(), [0.3, 1.0], 0.0, 1.5, config)
        problem = OdeProblem(
            dimension=2, rhs=lambda t, y: np.array([y[1], -y[0]]), direction="backward"
        )
        back = integrate(problem, forward.final_y, 1.5, 0.0, config)
        self.assertEqual(back.status, "ReachedTEnd")
        np.testing.assert_allclose(back.final_y, [0.3, 1.0], atol=100.0 * config.rtol)


class TestFailureModes(unittest.TestCase):
    """Tests for budget, floor and domain failures."""

    def test_max_steps(self):
        """Test the accepted step budget."""
        config = IntegrationConfig(max_steps=5, h_max=1e-2, h_init=1e-3)
        outcome = integrate(decay_problem(), [1.0], 0.0, 100.0, config)
        self.assertEqual(outcome.status, "MaxSteps")
        self.assertEqual(outcome.stats.steps_accepted, 5)

    def test_finite_time_blow_up(self):
        """Test y' = y^2 stops before its singularity at t = 1."""
        problem = OdeProblem(dimension=1, rhs=lambda t, y: y * y)
        outcome = integrate(problem, [1.0], 0.0, 2.0)
        self.assertIn(outcome.status, ("StepFloor", "NonFinite"))
        self.assertLess(outcome.final_t, 1.0)

    def test_t_end_behind_start(self):
        """Test that t_end against the direction is a domain error."""
        with self.assertRaises(DomainError):
            integrate(decay_problem(), [1.0], 1.0, 0.0)

    def test_non_finite_initial_state(self):
        """Test that a NaN initial state is rejected."""
        with self.assertRaises(DomainError):
            integrate(decay_problem(), [float("nan")], 0.0, 1.0)

    def test_zero_span(self):
        """Test that t_end == t0 returns the initial state."""
        outcome = integrate(decay_problem(), [2.0], 1.0, 1.0)
        self.assertEqual(outcome.status, "ReachedTEnd")
        self.assertEqual(outcome.final_y[0], 2.0)


class TestStepEmbedded(unittest.TestCase):
    """Tests for the single-step interface."""

    def test_zero_step_rejected(self):
        with self.assertRaises(DomainError):
            step_embedded(decay_problem(), 0.0, [1.0], 0.0)

    def test_wrong_dimension_rejected(self):
        with self.assertRaises(DomainError):
            step_embedded(decay_problem(), 0.0, [1.0, 2.0], 0.1)

    def test_non_finite_stage(self):
        """Test that a NaN-producing rhs raises NonFiniteStepError."""
        problem = OdeProblem(
            dimension=1, rhs=lambda t, y: np.array([math.sqrt(y[0]) if y[0] >= 0 else math.nan])
        )
        with self.assertRaises(NonFiniteStepError):
            step_embedded(problem, 0.0, [1e-8], -1.0)

    def test_single_step_accuracy(self):
        """Test one small step of exponential decay and its error estimate."""
        y_high, err = step_embedded(decay_problem(), 0.0, [1.0], 0.01)
        self.assertLess(abs(y_high[0] - math.exp(-0.01)), 1e-13)
        self.assertLess(abs(err[0]), 1e-10)


def test_hermite_is_exact_for_cubics():
    def y(t):
        return np.array([t**3 - 2.0 * t])

    def f(t):
        return np.array([3.0 * t**2 - 2.0])

    for t in (0.1, 0.5, 0.9):
        value = hermite_interpolate(0.0, y(0.0), f(0.0), 1.0, y(1.0), f(1.0), t)
        np.testing.assert_allclose(value, y(t), atol=1e-14)


def test_refine_adds_interior_samples():
    coarse = integrate(decay_problem(), [1.0], 0.0, 5.0, IntegrationConfig(refine=1))
    fine = integrate(decay_problem(), [1.0], 0.0, 5.0, IntegrationConfig(refine=4))
    assert len(fine.t) > len(coarse.t)
    assert np.all(np.diff(fine.t) > 0.0)
    np.testing.assert_allclose(fine.y[:, 0], np.exp(-fine.t), atol=1e-6)


def test_reruns_are_bit_identical():
    ground = EventSpec(g=lambda t, y: y[0], direction="decreasing", label="ground")
    first = integrate(falling_problem(), [1.0, 0.0], 0.0, 10.0, events=[ground])
    second = integrate(falling_problem(), [1.0, 0.0], 0.0, 10.0, events=[ground])
    assert np.array_equal(first.t, second.t)
    assert np.array_equal(first.y, second.y)
    assert first.event == second.event


def test_stats_merge():
    a = IntegrationStats(steps_accepted=3, steps_rejected=1, rhs_evals=19)
    b = IntegrationStats(steps_accepted=2, steps_rejected=0, rhs_evals=12)
    assert a.merged(b) == IntegrationStats(steps_accepted=5, steps_rejected=1, rhs_evals=31)


@pytest.mark.parametrize("rtol", [1e-6, 1e-8, 1e-10])
def test_error_scales_with_tolerance(rtol):
    config = IntegrationConfig(rtol=rtol, atol=rtol)
    outcome = integrate(decay_problem(), [1.0], 0.0, 2.0, config)
    assert abs(outcome.final_y[0] - math.exp(-2.0)) < 10.0 * rtol
