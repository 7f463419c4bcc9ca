import re
import sys

import pytest

from metriplectic import EquationOfState, FluidState, Grid, TransportCoefficients


@pytest.fixture
def eos():
    return EquationOfState()


@pytest.fixture
def coeffs():
    return TransportCoefficients(eta=0.1, zeta=0.05, kappa=0.1, lam=1.0)


@pytest.fixture(params=[(16,), (12, 10), (8, 8, 8)], ids=["1d", "2d", "3d"])
def grid(request):
    dims = request.param
    return Grid(dims, tuple(1.0 + 0.25 * i for i in range(len(dims))))


@pytest.fixture
def state(grid):
    return FluidState.random_smooth(grid, seed=42)



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda x: int(re.search(r"\d+", x).group())):
            terminalreporter.write_line(line)
