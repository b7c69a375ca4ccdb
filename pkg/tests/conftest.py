import pytest

from loopzones.cases import bialek4


@pytest.fixture
def case():
    return bialek4()


@pytest.fixture
def case_network(case):
    return case[0]


@pytest.fixture
def case_scenario(case):
    return case[1]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
