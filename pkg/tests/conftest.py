'''
Shared fixtures and the `slow` marker for acceptance-scale runs
(deselect with `-m "not slow"`).
'''
import pytest

from gcapacity.analysis.capacity import CapacityParams
from gcapacity.pde.gheat_pde import GridConfig


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run (minutes)")


@pytest.fixture
def unit_params():
    """σ̄ = 1, σ̲ = 0, T = 1."""
    return CapacityParams(sigma_bar=1.0)


@pytest.fixture
def coarse_grid():
    """[-6, 6] with dx = 0.05: fast enough for property tests."""
    return GridConfig.symmetric(6.0, 0.05)
