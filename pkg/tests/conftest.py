import random

import pytest

from gmboundary.fundgroup import GraphGroup
from gmboundary.graph import default_graph

CRITERIA = {}


def record(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])


@pytest.fixture(scope="session")
def G():
    return GraphGroup(default_graph())


@pytest.fixture
def rng():
    return random.Random(12345)
