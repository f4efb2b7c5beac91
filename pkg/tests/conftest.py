import numpy as np
import pytest

from colombeau.mollifier import make_mollifier
from colombeau.nets import ChartDomain, EpsilonGrid


@pytest.fixture(scope="session")
def moll():
    return make_mollifier(4, 1.0)


@pytest.fixture(scope="session")
def grid():
    return EpsilonGrid()


@pytest.fixture(scope="session")
def short_grid():
    return EpsilonGrid(0.5, 0.7, 10)


@pytest.fixture(scope="session")
def line():
    return ChartDomain.interval(-4.0, 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """``criterion(n, name, passed, detail)`` records a PASS/FAIL line and asserts."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(n, name, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {n:2d}  {name}: {detail}"
        lines[n] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 11):
        terminalreporter.write_line(lines.get(n, f"FAIL  criterion {n:2d}  not reached"))
