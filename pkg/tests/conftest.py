import numpy as np
import pytest

from graphshift.graph import Edge, Graph


@pytest.fixture
def signed_graph():
    """Four nodes, symmetric signed adjacency with one inhibitory edge."""
    return Graph(
        ("a", "b", "c", "d"),
        (Edge(0, 1, 1, False), Edge(1, 2, 1, False), Edge(1, 3, -1, False)),
    )


@pytest.fixture
def directed_star():
    """Nodes a, c, d all point into b."""
    return Graph(
        ("a", "b", "c", "d"),
        (Edge(0, 1, 1, True), Edge(2, 1, 1, True), Edge(3, 1, 1, True)),
    )


@pytest.fixture
def path4():
    return Graph(("a", "b", "c", "d"), (Edge(0, 1), Edge(1, 2), Edge(2, 3)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
