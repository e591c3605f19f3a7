import numpy as np
import pytest

# parameter grid reused by the slower suites: physical ratios x occupations
PHYSICAL_RS = (0.05, 0.1, 0.2, 0.24)
OCCUPATIONS = (0.5, 1.0, 10.0)
KINDS = ("mem", "post")


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end criteria gate")
