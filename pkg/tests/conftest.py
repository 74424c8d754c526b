import pytest
from hypothesis import HealthCheck, settings

from rivershare import Problem, RiverNetwork, nile_dataset

settings.register_profile(
    "deterministic",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def nile():
    return nile_dataset()


@pytest.fixture(scope="session")
def nile_problem(nile):
    return nile.problem()


@pytest.fixture(scope="session")
def confluence_problem():
    """Small non-Nile tree: three headwaters meeting at 4, draining to 5."""
    net = RiverNetwork.from_successor_map(5, {1: 4, 2: 4, 3: 4, 4: 5})
    return Problem(net, ("3", "1/2", "0", "7/3", "5"))
