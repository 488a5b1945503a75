import numpy as np
import pytest

from usui.builder import UsuiParams


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_params(rng, n_modes=6, max_power_gain=30.0, theta=None, seed_x=0.0):
    """Random valid interferometer parameters for oracle-equivalence tests."""
    return UsuiParams.from_power_gains(
        mu1_sq=1.0 + (max_power_gain - 1.0) * rng.random(),
        mu2_sq=1.0 + (max_power_gain - 1.0) * rng.random(),
        theta=2.0 * np.pi * rng.random() if theta is None else theta,
        n_modes=n_modes,
        seed_x=seed_x,
    )
