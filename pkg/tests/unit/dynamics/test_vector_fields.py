"""Unit tests for the near/far vector fields and frame transforms."""

import math
import unittest

import numpy as np
import pytest

from src.dynamics import (
    energy,
    energy_rate,
    far_field,
    far_rhs,
    far_rhs_reversed,
    far_to_near,
    near_field,
    near_rhs,
    near_to_far,
)
from src.dynamics.vector_fields import far_rows_to_near, near_rows_to_far
from src.model.domain import FarState, ModelParams, NearState
from src.model.exceptions import DomainError


class TestNearRhs(unittest.TestCase):
    """Tests for the near-field system."""

    def test_values_plus_branch(self):
        """Test the plus-branch rates at a hand-computed point."""
        params = ModelParams(m=2.0, branch="plus")
        rates = near_rhs(params, NearState(xi=1.0, u=0.5, w=0.2))
        # u^m = 0.25, p = 1.5
        np.testing.assert_allclose(rates, [0.25, 0.2, 0.25 * 1.5 - 1.5 * 0.2], rtol=1e-15)

    def test_values_minus_branch(self):
        """Test the sign flip of the minus branch."""
        params = ModelParams(m=2.0, branch="minus")
        rates = near_rhs(params, NearState(xi=1.0, u=0.5, w=0.2))
        np.testing.assert_allclose(rates, [0.25, 0.2, 0.25 * 0.5 + 1.5 * 0.2], rtol=1e-15)

    def test_xi_axis_is_equilibrium(self):
        for branch in ("plus", "minus"):
            params = ModelParams(m=3.0, branch=branch)
            np.testing.assert_array_equal(near_rhs(params, [0.7, 0.0, 0.0]), [0.0, 0.0, 0.0])

    def test_negative_u_non_integer_m(self):
        """Test that u < 0 with non-integer m is outside the domain."""
        params = ModelParams(m=2.5, branch="plus")
        with self.assertRaises(DomainError):
            near_rhs(params, [1.0, -0.1, 0.0])

    def test_array_field_matches_state_form(self):
        params = ModelParams(m=3.0, branch="plus")
        state = np.array([0.4, 0.3, -0.2])
        np.testing.assert_allclose(near_field(params)(0.0, state), near_rhs(params, state))


class TestFarRhs(unittest.TestCase):
    """Tests for the far-field system."""

    def test_values(self):
        params = ModelParams(m=3.0, branch="plus")
        x, y, z = 0.5, 0.2, 0.1
        p, q = 2.0, 3.0
        expected = [y - p * x * z, -z * y, y * (1.0 + y) - p * x * z - q * z * z]
        np.testing.assert_allclose(far_rhs(params, [x, y, z]), expected, rtol=1e-15)

    def test_equilibria_on_x_axis(self):
        for branch in ("plus", "minus"):
            params = ModelParams(m=2.0, branch=branch)
            np.testing.assert_array_equal(far_rhs(params, FarState(x=1.3, y=0.0, z=0.0)), 0.0)

    def test_reversed_clock(self):
        """Test the reversed-clock field is the negated minus-branch field."""
        params = ModelParams(m=4.0, branch="plus")
        state = [0.8, 0.1, 0.05]
        minus = params.with_branch("minus")
        np.testing.assert_allclose(far_rhs_reversed(params, state), -far_rhs(minus, state))
        np.testing.assert_allclose(
            far_field(minus, reversed_clock=True)(0.0, np.array(state)),
            -far_rhs(minus, state),
        )


class TestTransforms(unittest.TestCase):
    """Tests for the near/far frame change."""

    def test_known_values(self):
        params = ModelParams(m=3.0, branch="plus")
        far = near_to_far(params, NearState(xi=2.0, u=0.5, w=0.25))
        # p = 2, q = 3
        self.assertAlmostEqual(far.x, 2.0 * 0.5**-2.0)
        self.assertAlmostEqual(far.y, 2.0)
        self.assertAlmostEqual(far.z, 0.25 * 0.5**-3.0)

    def test_inverse(self):
        params = ModelParams(m=2.5, branch="minus")
        near = NearState(xi=-0.3, u=0.7, w=0.11)
        back = far_to_near(params, near_to_far(params, near))
        np.testing.assert_allclose(back.as_array(), near.as_array(), rtol=1e-14)

    def test_singular_points(self):
        params = ModelParams(m=2.0, branch="plus")
        with self.assertRaises(DomainError):
            near_to_far(params, [1.0, 0.0, 0.0])
        with self.assertRaises(DomainError):
            far_to_near(params, [1.0, 0.0, 0.0])

    def test_row_transforms_mark_undefined_rows(self):
        params = ModelParams(m=2.0, branch="plus")
        rows = np.array([[1.0, 0.5, 0.1], [1.0, 0.0, 0.1]])
        far = near_rows_to_far(params, rows)
        expected = near_to_far(params, rows[0]).as_array()
        np.testing.assert_allclose(far[0], expected)
        self.assertTrue(np.all(np.isnan(far[1])))
        near = far_rows_to_near(params, far[:1])
        np.testing.assert_allclose(near[0], rows[0], rtol=1e-14)

    def test_transformed_fields_agree(self):
        """Test that the far field is the near field pushed through the frame change."""
        params = ModelParams(m=3.0, branch="plus")
        near = np.array([1.5, 0.4, 0.3])
        near_rate = near_rhs(params, near)
        far = near_to_far(params, near).as_array()
        # ds = u^p dtau
        xi, u, w = near
        p, q = params.p, params.q
        dx = near_rate[0] * u**-p - p * xi * u ** (-p - 1.0) * near_rate[1]
        dy = -near_rate[1] / (u * u)
        dz = near_rate[2] * u**-q - q * w * u ** (-q - 1.0) * near_rate[1]
        expected = u**p * far_rhs(params, far)
        np.testing.assert_allclose(np.array([dx, dy, dz]), expected, rtol=1e-12)


class TestEnergy(unittest.TestCase):
    def test_energy_value(self):
        params = ModelParams(m=2.0, branch="plus")
        value = energy(params, NearState(xi=0.0, u=1.0, w=2.0))
        self.assertAlmostEqual(value.E, 2.0 - 1.0 / 3.0 - 0.25)

    def test_energy_rate_is_dissipative_for_positive_xi(self):
        params = ModelParams(m=2.0, branch="plus")
        self.assertLess(energy_rate(params, [1.0, 0.3, 0.2]), 0.0)
        self.assertEqual(energy_rate(params, [1.0, 0.3, 0.0]), 0.0)

    def test_energy_rate_matches_chain_rule(self):
        params = ModelParams(m=3.0, branch="plus")
        state = np.array([0.9, 0.4, -0.25])
        _, u, w = state
        rates = near_rhs(params, state)
        m = params.m
        chain = w * rates[2] - (u**m + u ** (m + 1.0)) * rates[1]
        self.assertTrue(math.isclose(chain, energy_rate(params, state), rel_tol=1e-12))


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0, 5.0])
def test_params_derived_constants(m):
    params = ModelParams(m=m, branch="plus")
    assert params.p == pytest.approx((m + 1.0) / 2.0)
    assert params.q == pytest.approx((m + 3.0) / 2.0)
    assert params.x_q == pytest.approx(math.sqrt(2.0 / (m + 1.0)))
    assert params.with_branch("minus").sign == -1.0
