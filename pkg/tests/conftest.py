import pytest

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def record_criterion(request):
    """Store one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash[_LINES_KEY]

    def record(number: int, ok: bool, detail: str):
        lines.append((number, f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
