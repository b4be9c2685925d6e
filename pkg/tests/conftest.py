import numpy as np
import pytest

from ddbar.catalog import entry_names, load

# models are expensive enough to build once per session
_CACHE = {}


def catalog(name, **params):
    key = (name, tuple(sorted(params.items())))
    if key not in _CACHE:
        _CACHE[key] = load(name, **params)
    return _CACHE[key]


@pytest.fixture(scope="session")
def torus2():
    return catalog("torus2")


@pytest.fixture(scope="session")
def torus3():
    return catalog("torus3")


@pytest.fixture(scope="session")
def iwasawa():
    return catalog("iwasawa")


@pytest.fixture(scope="session")
def fou():
    return catalog("fou")


@pytest.fixture(scope="session")
def kodaira():
    return catalog("kodaira_thurston")


@pytest.fixture(params=entry_names(), scope="session")
def entry(request):
    return catalog(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    import time

    config._ddbar_start = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import sys
    import time

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in mod.summary_lines():
        tr.write_line(line)
    total = time.perf_counter() - config._ddbar_start
    tr.write_line(f"full run: {total:.1f}s")
