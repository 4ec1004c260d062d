"""Shared pytest wiring: the acceptance-criteria report."""

import pytest

# one line per acceptance criterion, echoed after the test summary so the
# PASS/FAIL verdicts are visible even with output capture on
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
