import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, plus INFO lines."""

    def record(number, title, ok, detail, info=()):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        for extra in info:
            print(f"    INFO {extra}")
            ACCEPTANCE_LINES.append(f"    INFO {extra}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
