"""Shared fixtures for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from fluxjump import FluxPair, power_law_flux, shifted_quadratic


@pytest.fixture
def reference_pair() -> FluxPair:
    """The workhorse model: ``g = u**2 - 1`` on the left, ``f = u**2`` on the right."""
    return FluxPair(left=shifted_quadratic(-1.0), right=power_law_flux(2.0))


@pytest.fixture
def cubic_pair() -> FluxPair:
    """A pair whose singular map degenerates with a cube-root exponent."""
    return FluxPair(left=shifted_quadratic(-1.0), right=power_law_flux(3.0))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
