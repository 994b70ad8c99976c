import math

import pytest

from magnon_sense import baseline_parameters, derived_parameters

TWO_PI = 2.0 * math.pi


@pytest.fixture
def baseline():
    """Reference parameter set at its default squeeze amplitude (1.5)."""
    return baseline_parameters()


@pytest.fixture
def baseline_dp(baseline):
    return derived_parameters(baseline)
