import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance verdict line; shown in the terminal summary."""
    def _report(criterion, ok, detail):
        verdict = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
        _ACCEPTANCE_LINES.append(f"[criterion {criterion}] {verdict}: {detail}")
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
