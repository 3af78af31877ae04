import numpy as np
import pytest

from slnet import SystemParams, build_complete, build_ring


@pytest.fixture
def k3_params():
    return SystemParams(1.0, 0.0, 0.1, build_complete(3))


@pytest.fixture
def ring62_params():
    return SystemParams(1.0, 1.0, 0.02, build_ring(6, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria append (number, passed, detail) here; printed after the run
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
