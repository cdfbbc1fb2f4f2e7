from pathlib import Path

import pytest

from meshpilot.corpus import GenerationConfig, generate_corpus
from meshpilot.mesh_sim import EventKind, NetworkEvent, init_mesh, record_event

DATA = Path(__file__).parent / "data"
TABLE_OBSERVATION = "Network Status from Node1 Best Neighbors List is [2, 3]."


@pytest.fixture
def mesh():
    return init_mesh(3, 36)


@pytest.fixture
def table_event():
    return NetworkEvent(EventKind.BEST_NEIGHBORS_UPDATE, subject=1, neighbors=(2, 3))


@pytest.fixture
def table_step(table_event):
    """A corpus step reproducing the worked prompt example."""
    corpus = generate_corpus(GenerationConfig(step_count=1), seed=48)
    step = corpus.steps[0]
    assert step.event == table_event
    return step


@pytest.fixture(scope="session")
def corpus7():
    return generate_corpus(GenerationConfig(step_count=200), seed=7)


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
