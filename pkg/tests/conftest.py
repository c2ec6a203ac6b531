import random
from itertools import combinations

import pytest

from hyperlag.hypergraph import RUniformGraph

ACCEPTANCE = {}


def random_graph(rng: random.Random, r: int, n: int, p: float) -> RUniformGraph:
    edges = [e for e in combinations(range(1, n + 1), r) if rng.random() < p]
    return RUniformGraph(r, n, tuple(edges))


def random_nonempty_graph(rng, r, n, p):
    while True:
        g = random_graph(rng, r, n, p)
        if g.edges:
            return g


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
