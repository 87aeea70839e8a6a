import pytest

from fourslot.checker import explore
from fourslot.model import PLAIN, TIMESTAMPED, TransitionSystem
from fourslot.proof import run_proof_script

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ts4():
    return TransitionSystem(TIMESTAMPED, 4)


@pytest.fixture(scope="session")
def reach4(ts4):
    return explore(ts4)


@pytest.fixture(scope="session")
def plain_reach4():
    return explore(TransitionSystem(PLAIN, 4))


@pytest.fixture(scope="session")
def reach2():
    return explore(TransitionSystem(TIMESTAMPED, 2))


@pytest.fixture(scope="session")
def proof4(ts4):
    return run_proof_script(ts4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
