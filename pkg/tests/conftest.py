"""Shared pytest plumbing for the acceptance summary block."""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Record a one-line verdict, echoed in the terminal summary."""
    def _record(line):
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
