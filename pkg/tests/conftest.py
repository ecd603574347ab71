"""Shared fixtures and hypothesis configuration for the test suite."""
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twomix import TruthSpec, sample_gaussian

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def std_normal_data():
    """Factory for standard-normal datasets (the over-specified regime)."""

    def make(n, d, seed=0):
        return sample_gaussian(n, d, TruthSpec(theta_star=np.zeros(d)), seed)

    return make
