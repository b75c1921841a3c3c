"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""

import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request, capsys):
    """Record ``(ok, detail)`` for an acceptance criterion and echo the line immediately."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE[number] = line
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
