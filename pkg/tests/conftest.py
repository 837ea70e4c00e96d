from functools import lru_cache

import pytest

from tasep_bethe.bethe import solve_all
from tasep_bethe.combinat import RingShape


@lru_cache(maxsize=None)
def _catalog(M, N):
    return solve_all(RingShape(M, N))


@pytest.fixture(scope="session")
def catalog():
    """catalog(M, N) -> cached SolutionCatalog."""
    return _catalog


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
