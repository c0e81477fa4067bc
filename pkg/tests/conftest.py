from __future__ import annotations

import pytest
import torch
from pytest import FixtureRequest

from pyrptorch.kernels import MassParam
from pyrptorch.suites import SuiteConfig
from pyrptorch.utils import generator


@pytest.fixture
def gen() -> torch.Generator:
    return generator(0)


@pytest.fixture(params=[(2, 0.3), (2, 1.7), (3, 0.4), (3, 1.0), (3, 2.5), (4, 0.9)])
def mass_param(request: FixtureRequest) -> MassParam:
    """Dimension and mass pairs covering both regimes of lambda, including m = rho."""
    n, m = request.param
    return MassParam(n, m)


@pytest.fixture
def suite_config() -> SuiteConfig:
    return SuiteConfig(seed=0, search_trials=200)
