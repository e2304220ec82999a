import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record a named acceptance verdict; a summary line per criterion is
    printed at the end of the session."""
    def record(number, title, ok, detail=""):
        _CRITERIA[number] = (title, ok, detail)
        print(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip())
