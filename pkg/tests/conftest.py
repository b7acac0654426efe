import helpers


def pytest_terminal_summary(terminalreporter):
    res = helpers.ACCEPTANCE
    if not res:
        return
    terminalreporter.section("acceptance criteria")
    for line in helpers.acceptance_lines():
        terminalreporter.write_line(line)
