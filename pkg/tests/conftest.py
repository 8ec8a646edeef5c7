import sys

import pytest
from hypothesis import HealthCheck, settings

from btstrata import lattice as lt

settings.register_profile("btstrata", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("btstrata")


@pytest.fixture(scope="session")
def space3():
    return lt.PadicHermitianSpace(3, 3)


@pytest.fixture(scope="session")
def space4():
    return lt.PadicHermitianSpace(4, 3)


@pytest.fixture(scope="session")
def space5():
    return lt.PadicHermitianSpace(5, 3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
