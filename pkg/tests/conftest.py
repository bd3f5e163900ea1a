import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def acceptance(pytestconfig):
    """Run one criterion, record a PASS/FAIL line, re-raise failures."""
    lines = pytestconfig.stash[_LINES]

    def check(number, title, body):
        try:
            detail = body()
        except AssertionError as e:
            msg = str(e).splitlines()[0] if str(e) else "assertion failed"
            line = f"[FAIL] {number:>2}. {title}: {msg}"
            lines.append(line)
            print(line)
            raise
        line = f"[PASS] {number:>2}. {title}" + (f": {detail}" if detail else "")
        lines.append(line)
        print(line)

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(line)
