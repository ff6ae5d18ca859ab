import os
from pathlib import Path

import pytest

from eigencuts.maxcut import Graph

# Overridable so packaged fixture sets can live elsewhere.
FIXTURES = Path(os.environ.get("EIGENCUTS_FIXTURES",
                               Path(__file__).parent / "fixtures"))

PETERSEN_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
                  (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
                  (5, 7), (7, 9), (9, 6), (6, 8), (8, 5)]

# One "criterion N [PASS|FAIL]: ..." line per acceptance criterion, echoed
# after the run so the gate can be read off the terminal in one place.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def cycle(k: int) -> Graph:
    return Graph.from_edges(k, [(i, (i + 1) % k) for i in range(k)])


def complete(k: int) -> Graph:
    return Graph.from_edges(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


@pytest.fixture(scope="session")
def petersen() -> Graph:
    return Graph.from_edges(10, PETERSEN_EDGES)


@pytest.fixture(scope="session")
def c5() -> Graph:
    return cycle(5)


@pytest.fixture(scope="session")
def k5() -> Graph:
    return complete(5)


@pytest.fixture(scope="session")
def c8() -> Graph:
    return cycle(8)


@pytest.fixture(scope="session")
def k2() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture(scope="session")
def star() -> Graph:
    return Graph.from_edges(5, [(0, i) for i in range(1, 5)])


@pytest.fixture(scope="session")
def fixture_graphs(petersen, c5, k5, c8, k2, star):
    """Named graph fixtures used by the dominance/lower-bound sweeps."""
    return {"petersen": petersen, "c5": c5, "k5": k5, "c8": c8,
            "k2": k2, "star": star}


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES
