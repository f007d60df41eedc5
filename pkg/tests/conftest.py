"""
Shared fixtures: the worked four-generator market and its variants.
"""
import os

# Keep informational logs out of captured output
os.environ.setdefault("CHP_LOG_LEVEL", "WARNING")

from pathlib import Path  # noqa: E402

import pytest  # noqa: E402

from chp_power.core.config.settings import settings  # noqa: E402
from chp_power.market.model import Market  # noqa: E402

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def m4() -> Market:
    """G=10, s=10 for all, v=[1,2,3,4]; the worked market at y=15."""
    return Market.from_costs(10, [10, 10, 10, 10], [1, 2, 3, 4])


@pytest.fixture
def m3() -> Market:
    return Market.from_costs(10, [10, 10, 10], [1, 2, 3])


@pytest.fixture
def shading_market() -> Market:
    """Generator 1 holds the partial slot as the demoted unit and gains by shading."""
    return Market.from_costs(10, [0, 21, 100], [3, 1, 0])


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def settings_override(monkeypatch):
    """Set fields on the shared settings object for one test."""

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setattr(settings, key, value)
        return settings

    return apply
