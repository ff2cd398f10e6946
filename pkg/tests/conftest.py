import time

import numpy as np
import pytest

from lgin.equilibria import SolverError, find_equilibria
from lgin.sweep import draw_params

ACCEPTANCE_LINES: list[str] = []
SWEEP_DRAWS = 10_000
SWEEP_SEED = 20240601


class Sweep:
    """Random draws with their equilibrium sets; solver failures are kept as values."""

    def __init__(self, n, seed):
        t0 = time.perf_counter()
        self.params = draw_params(np.random.default_rng(seed), n)
        self.results = []
        for p in self.params:
            try:
                self.results.append(find_equilibria(p))
            except SolverError as exc:
                self.results.append(exc)
        self.elapsed = time.perf_counter() - t0

    def __iter__(self):
        return iter(zip(self.params, self.results))


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def sweep():
    return Sweep(SWEEP_DRAWS, SWEEP_SEED)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
