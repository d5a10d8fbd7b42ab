import numpy as np
import pytest

from lohe_sync import GridSpec, ModelConfig
from lohe_sync.initial_data import gaussian_pair, perturbed_gaussians


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(dim=1, points=64, length=20.0)


@pytest.fixture(scope="session")
def grid256():
    return GridSpec(dim=1, points=256, length=20.0)


@pytest.fixture
def pair_config():
    # lam = 2*0.375/1.0 = 0.75, the workhorse underdamped configuration
    return ModelConfig(coupling=1.0, frequencies=(0.375, -0.375))


@pytest.fixture
def pair_state(grid64):
    return gaussian_pair(grid64, separation=2.0, sigma=1.5)


@pytest.fixture
def five_state(grid64):
    return perturbed_gaussians(grid64, 5, seed=2024)


def assert_close(a, b, tol, label=""):
    err = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    assert err <= tol, f"{label} error {err:g} above {tol:g}"
