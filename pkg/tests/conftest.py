import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the line is also printed for ``-s`` runs."""

    def record(n, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d} {title}: {detail}"
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance")
        for line in sorted(_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
