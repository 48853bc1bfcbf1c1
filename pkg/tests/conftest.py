import pytest

_LINES: dict = {}


@pytest.fixture
def criterion():
    """Record the PASS/FAIL line for one acceptance criterion, then assert."""

    def record(num: int, ok: bool, detail: str):
        _LINES[num] = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_LINES[num])
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_LINES):
        terminalreporter.write_line(_LINES[num])
