import functools
import math

import pytest

from poissoncap import ChannelScenario, SolverConfig, solve_capacity

# PASS/FAIL lines from test_acceptance.py, echoed in the terminal summary so
# they show up without -s
ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_solve(lam, E, A=math.inf, **cfg):
    """One solve per distinct scenario per session; several files reuse them."""
    return solve_capacity(ChannelScenario.constant(lam, E, A), SolverConfig(**cfg))


@pytest.fixture
def solve():
    return cached_solve


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
