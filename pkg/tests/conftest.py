import numpy as np
import pytest

from dmtsim import FixedRate, SystemConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_config(M=2, N=4, interferers=3, xi=0.5, grid=(10.0, 20.0, 30.0), **kw):
    return SystemConfig(
        M=M, N=N, num_interferers=interferers, xi=xi if interferers else 0.0,
        snr_grid_db=grid, rate=FixedRate(5.0), trials_per_point=kw.pop("trials", 2000), **kw
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
