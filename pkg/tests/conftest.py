import pytest

_CRITERIA = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; the verdict is printed at session end."""
    entry = {"name": request.node.name, "passed": False, "detail": ""}
    _CRITERIA.append(entry)

    def record(detail=""):
        entry["passed"] = True
        entry["detail"] = detail

    yield record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for c in _CRITERIA:
        verdict = "PASS" if c["passed"] else "FAIL"
        terminalreporter.write_line(f"{verdict}  {c['name']}  {c['detail']}")
