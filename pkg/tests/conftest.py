import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from klfield import Kernel, analytic_spectrum_exponential, make_grid, nystrom_spectrum  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def exp_kernel():
    return Kernel("exponential", 1.0, 1.0)


@pytest.fixture(scope="session")
def grid500(exp_kernel):
    return make_grid(exp_kernel.domain, 500, "trapezoid")


@pytest.fixture(scope="session")
def spectrum500(exp_kernel, grid500):
    """All 500 Nystrom modes from the in-package Jacobi solver."""
    return nystrom_spectrum(exp_kernel, grid500, solver="jacobi")


@pytest.fixture(scope="session")
def analytic500(exp_kernel, grid500):
    return analytic_spectrum_exponential(exp_kernel, 50, grid500)


@pytest.fixture(scope="session")
def small_spectrum(exp_kernel):
    return nystrom_spectrum(exp_kernel, make_grid(exp_kernel.domain, 101), solver="jacobi")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
