"""Pytest configuration and shared test fixtures."""

import pytest

from src.model.config_schema_model import SearchConfig, ShootConfig
from src.model.domain import ModelParams
from src.utils.cache_manager import get_cache_manager
from src.utils.performance import clear_metrics


def create_fast_search_config() -> SearchConfig:
    """Create a coarse search configuration for unit tests.

    Returns:
        SearchConfig: Sparse scan with loose scan tolerance.
    """
    return SearchConfig(points_per_decade=12, scan_rtol=1e-7, x0_min=0.1, x0_max=2.0)


@pytest.fixture
def shoot_config() -> ShootConfig:
    """Pytest fixture providing the default shooting configuration.

    Returns:
        ShootConfig: Default settings.
    """
    return ShootConfig()


@pytest.fixture
def fast_search_config() -> SearchConfig:
    """Pytest fixture providing a coarse search configuration.

    Returns:
        SearchConfig: Sparse scan settings.
    """
    return create_fast_search_config()


@pytest.fixture
def minus_params() -> ModelParams:
    return ModelParams(m=3.0, branch="minus")


@pytest.fixture
def plus_params() -> ModelParams:
    return ModelParams(m=3.0, branch="plus")


@pytest.fixture(autouse=True)
def clear_cache():
    """Clear shot caches and metrics before each test to ensure clean state."""
    cache_manager = get_cache_manager()
    cache_manager.clear()
    clear_metrics()
    yield
    cache_manager.clear()
