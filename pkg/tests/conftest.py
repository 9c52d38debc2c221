"""Collects acceptance verdicts and prints one line per criterion."""

_verdicts = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    crit = props.get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.failed:
        _verdicts[crit] = ("PASS" if report.passed else "FAIL", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for crit in sorted(_verdicts):
        outcome, detail = _verdicts[crit]
        terminalreporter.write_line(f"criterion {crit}: {outcome}  {detail}".rstrip())
