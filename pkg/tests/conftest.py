_acceptance_lines = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
