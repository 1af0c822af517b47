import pytest

_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line; the lines are echoed in the terminal summary."""

    def report(number, title, ok, detail=""):
        line = "%s criterion %s: %s" % ("PASS" if ok else "FAIL", number, title)
        if detail:
            line += " (%s)" % detail
        _LINES.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
