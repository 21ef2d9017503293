import _report


def pytest_terminal_summary(terminalreporter):
    if _report.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _report.RESULTS:
            terminalreporter.write_line(line)
