import numpy as np
import pytest

from nlkpp import build_grid, make_kernel, sample


def standard_coef(x, y=None):
    return 2.0 + np.sin(2.0 * np.pi * x)


@pytest.fixture
def uniform1d():
    return make_kernel("uniform", 1)


@pytest.fixture
def unit_grid():
    return build_grid(1.0, 200)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def coef_on():
    def _coef(grid, f=standard_coef):
        return sample(grid, f)
    return _coef


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    store = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        store[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        terminalreporter.write_line(store[number])
