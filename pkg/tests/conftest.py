import pytest

from mtdgame import GameSpec, solve


@pytest.fixture(scope="session")
def default_spec():
    return GameSpec()


@pytest.fixture(scope="session")
def default_solution(default_spec):
    return solve(default_spec)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.report_lines():
        terminalreporter.write_line(line)
