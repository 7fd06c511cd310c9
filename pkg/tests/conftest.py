from pathlib import Path

import pytest

from netcom import EmbedConfig, Embedding, parse_edge_list
from netcom.synth import barbell, complete_graph, path_graph, planted_partition

DATA = Path(__file__).parent / "data"


@pytest.fixture
def p3():
    return path_graph(3)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def bar():
    return barbell()


@pytest.fixture
def bar_emb(bar):
    return Embedding.from_graph(bar, EmbedConfig())


@pytest.fixture(scope="session")
def karate():
    return parse_edge_list(DATA / "karate.txt")


@pytest.fixture(scope="session")
def planted_1k():
    return planted_partition(10, 100, 0.3, 0.005, seed=0)


# acceptance criteria report one line each; printed again at the end of the run
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
