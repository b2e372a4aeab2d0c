import os

import numpy as np
import pytest

from polyparse import autodiff


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the extended (slow) suite")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: extended suite, hours of CPU; enable with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow") or os.environ.get("POLYPARSE_RUN_SLOW"):
        return
    skip = pytest.mark.skip(reason="extended suite; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def float64_mode():
    old = autodiff.default_dtype()
    autodiff.set_default_dtype(np.float64)
    yield
    autodiff.set_default_dtype(old)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria report: one line per criterion, printed after the run
_CRITERIA: dict[str, str] = {}


@pytest.fixture
def criterion():
    def record(number, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[str(number)] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
