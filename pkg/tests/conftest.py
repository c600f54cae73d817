import numpy as np
import pytest

from hjwave import ActionModel, PotentialSpec, QMap


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long propagation runs (deselect with -m 'not slow')")


@pytest.fixture(scope="session")
def quartic():
    """c = 1: m = omega = 1, g = 0.5."""
    spec = PotentialSpec(1.0, 1.0, 0.5)
    return spec, ActionModel(spec), QMap(spec)


@pytest.fixture(scope="session")
def harmonic():
    spec = PotentialSpec(1.0, 1.0, 0.0)
    return spec, ActionModel(spec), QMap(spec)


def spec_for_c(c, m=1.0, omega=1.0):
    return PotentialSpec(m, omega, c * m * omega**2 / 2.0)


@pytest.fixture
def sample_x():
    return np.linspace(-6.0, 6.0, 1001)
