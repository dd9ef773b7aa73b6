import functools
import time

import pytest

from tentulam.analysis import sweep, tent_grid
from tentulam.bv import build_suite
from tentulam.maps import tent_family
from tentulam.ulam import build_partition, transfer_matrix


@functools.lru_cache(maxsize=None)
def partition(n):
    return build_partition(n)


@functools.lru_cache(maxsize=None)
def matrix(t, n):
    return transfer_matrix(tent_family(t), partition(n))


@pytest.fixture(scope="session")
def part128():
    return partition(128)


@pytest.fixture(scope="session")
def suite128(part128):
    return build_suite(part128, seed=42)


@pytest.fixture(scope="session")
def sweep128_timed():
    start = time.perf_counter()
    res = sweep(tent_grid(17), 128)
    return res, time.perf_counter() - start


@pytest.fixture(scope="session")
def sweep128(sweep128_timed):
    return sweep128_timed[0]


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
