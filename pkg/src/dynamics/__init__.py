from src.dynamics.exact import (
    exact_far,
    exact_near,
    exact_solution_residuals,
    exact_stationary_profile,
    stable_manifold_psi,
    x_q,
)
from src.dynamics.vector_fields import (
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

__all__ = [
    "energy",
    "energy_rate",
    "exact_far",
    "exact_near",
    "exact_solution_residuals",
    "exact_stationary_profile",
    "far_field",
    "far_rhs",
    "far_rhs_reversed",
    "far_to_near",
    "near_field",
    "near_rhs",
    "near_to_far",
    "stable_manifold_psi",
    "x_q",
]
