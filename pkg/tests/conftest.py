import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """report(n, text, ok, detail): print a PASS/FAIL line and assert ok."""

    def report(n, text, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}" + (f" [{detail}]" if detail else "")
        request.config.stash.setdefault(_LINES, []).append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
