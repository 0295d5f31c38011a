from src.shooting.extrapolation import extrapolate_A_minus
from src.shooting.seeds import (
    lift_along_slow_manifold,
    seed_far_minus,
    seed_near_plus,
    slow_manifold_w,
)
from src.shooting.shots import shoot_minus, shoot_plus

__all__ = [
    "extrapolate_A_minus",
    "lift_along_slow_manifold",
    "seed_far_minus",
    "seed_near_plus",
    "shoot_minus",
    "shoot_plus",
    "slow_manifold_w",
]
