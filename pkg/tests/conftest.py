"""Shared pytest plumbing: collect acceptance lines into the terminal summary."""

ACCEPTANCE_LINES = []


def record_criterion(number: int, name: str, passed: bool, detail: str):
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
