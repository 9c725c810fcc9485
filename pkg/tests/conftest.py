import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
PROFILES = REPO_ROOT / "profiles"
SCENARIOS = REPO_ROOT / "scenarios"

sys.path.insert(0, str(REPO_ROOT / "src"))

from adaptiflow.clock import VirtualClock  # noqa: E402
from adaptiflow.teastore import standard_mesh  # noqa: E402


@pytest.fixture
def clock():
    return VirtualClock(0)


@pytest.fixture
def mesh(clock):
    """Five-node loopback mesh with every role's standard actions registered."""
    return standard_mesh(clock)


@pytest.fixture
def scenario_path():
    def path(name: str) -> Path:
        return SCENARIOS / f"{name}.json"

    return path


@pytest.fixture
def profile_path():
    def path(name: str) -> Path:
        return PROFILES / f"{name}.csv"

    return path
