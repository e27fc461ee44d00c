import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    entry = {"name": request.node.name, "detail": ""}
    yield entry
    passed = not getattr(request.node, "_failed", False)
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {entry['name']}: {entry['detail']}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and rep.failed:
        item._failed = True


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
