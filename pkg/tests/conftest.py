import pytest

from varineq.profiles import GeometryContext

# filled by test_acceptance, printed once at the end of the session
ACCEPTANCE_LINES = {}


@pytest.fixture
def g3():
    return GeometryContext(3, 1.0)


@pytest.fixture
def g4():
    return GeometryContext(4, 1.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
