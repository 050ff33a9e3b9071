import pytest

ACCEPTANCE = []


@pytest.fixture
def record():
    """Store one pass/fail line for the acceptance summary."""
    def add(number, name, ok, detail):
        ACCEPTANCE.append((number, name, bool(ok), detail))
        return ok
    return add


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}")
