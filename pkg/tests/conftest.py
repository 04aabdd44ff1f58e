"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""
import pytest

_OUTCOMES: dict = {}


@pytest.fixture
def record_criterion():
    """``record_criterion(number, passed, detail)``; a criterion fails if any check of it fails."""

    def record(number, passed, detail):
        ok, details = _OUTCOMES.get(number, (True, []))
        _OUTCOMES[number] = (ok and bool(passed), details + [detail])

    return record


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        ok, details = _OUTCOMES[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({'; '.join(details)})")
