import numpy as np
import pytest

from chronogen.model import assemble_global, paper_example_spec
from chronogen.scenarios import PaperExampleReference, paper_example_state

ACCEPTANCE_LINES = []

A = 1 + np.sqrt(3)
PAPER_H = np.array(
    [[1, 1, 0, 1],
     [1, -1, 1, 0],
     [0, 1, 1, -1],
     [1, 0, -1, -1]],
    dtype=float,
)
PAPER_PSI = np.array([1, 0, -1, -A], dtype=complex)


@pytest.fixture(scope="session")
def paper_spec():
    return paper_example_spec()


@pytest.fixture(scope="session")
def paper_h(paper_spec):
    return assemble_global(paper_spec)


@pytest.fixture(scope="session")
def paper_state(paper_spec):
    return paper_example_state(paper_spec)[0]


@pytest.fixture(scope="session")
def reference():
    return PaperExampleReference()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
