import pytest

import _shared

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def cauchy_ensemble():
    return _shared.cauchy_ensemble()


@pytest.fixture(scope="session")
def ar1_ensemble():
    return _shared.ar1_ensemble()


@pytest.fixture(scope="session")
def explosive_ensemble():
    return _shared.explosive_ensemble()


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
