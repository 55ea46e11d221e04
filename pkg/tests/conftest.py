import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nilcalc.lie_core import load_group

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

CATALOG = ("abelian:3", "heisenberg:1", "heisenberg:2", "engel")


@pytest.fixture(params=CATALOG)
def catalog_group(request):
    return load_group(request.param)


@pytest.fixture
def H():
    return load_group("heisenberg:1")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
