import pytest

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def criterion():
    def record(key: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[key] = f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.rstrip("abcdefghijklmnopqrstuvwxyz")), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
