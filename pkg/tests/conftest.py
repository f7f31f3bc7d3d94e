import _acceptance_log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_log.results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _acceptance_log.results:
            terminalreporter.write_line(line)
