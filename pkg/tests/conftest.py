import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    """Store the one-line outcome of an acceptance criterion for the session summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
