import numpy as np
import pytest

from rsk import kernels

# filled by test_acceptance; printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def _compile_kernels():
    # keep numba compilation out of any timed test
    kernels.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
