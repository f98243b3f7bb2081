import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from graphpade.graph import Graph, build_laplacian, generate_block_graph
from graphpade.spectral import decompose

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_graph(rng, n, p=0.3):
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph.from_pairs(n, pairs)


@pytest.fixture(scope="session")
def block500():
    g = generate_block_graph(5, 100, 8, 3, seed=0)
    return g, decompose(build_laplacian(g))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> bool:
    ACCEPTANCE.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
