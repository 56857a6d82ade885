import itertools
import math

import numpy as np
import pytest

from loopcalc import fixtures
from loopcalc.model import edge_key, local_index


def brute_force_z(model):
    """Independent oracle: python loop over every configuration."""
    total = 0.0
    for letters in itertools.product(range(model.q), repeat=len(model.edges)):
        sigma = dict(zip(model.edges, letters))
        w = 1.0
        for a in model.vertices:
            loc = [sigma[edge_key(a, b)] for b in model.neighbors(a)]
            w *= model.tables[a][local_index(model, a, loc)]
        total += w
    return total


def ising_z(j):
    return (2 * math.cosh(j)) ** 3 * (1 + math.tanh(j) ** 3)


@pytest.fixture
def load():
    return fixtures.load


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Yield a recorder; the test's outcome and runtime land in the summary."""
    import time

    rec = {"name": request.node.name, "detail": ""}
    start = time.perf_counter()
    yield rec
    rec["seconds"] = time.perf_counter() - start


def pytest_runtest_makereport(item, call):
    if call.when == "call" and "criterion" in item.fixturenames:
        rec = item.funcargs["criterion"]
        status = "PASS" if call.excinfo is None else "FAIL"
        ACCEPTANCE_LINES.append(f"{status} {rec['name']}: {rec['detail']}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
