import os

import numpy as np
import pytest

from qcaps.equiv import Collineation
from qcaps.fixtures import fixtures
from qcaps.geometry import enumerate_points, rank

ACCEPTANCE_LINES: list[str] = []


def pytest_collection_modifyitems(config, items):
    if os.environ.get("QCAPS_LONG") == "1":
        return
    skip = pytest.mark.skip(reason="long-running reproduction; set QCAPS_LONG=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pg44():
    return enumerate_points(4, 4)


@pytest.fixture(scope="session")
def pg24():
    return enumerate_points(2, 4)


@pytest.fixture(scope="session")
def fixture_caps():
    return {f.name: f.load() for f in fixtures()}


def random_collineation(rng, size=5, frobenius=None) -> Collineation:
    while True:
        m = rng.integers(0, 4, size=(size, size), dtype=np.uint8)
        if rank(m) == size:
            break
    if frobenius is None:
        frobenius = bool(rng.integers(0, 2))
    return Collineation.from_array(m, frobenius)
