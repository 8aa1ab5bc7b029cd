"""Pytest hooks: collect acceptance-test outcomes and print one line per
criterion at the end of the run."""

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_a"):
        return
    tag = name.split("_")[1].upper()
    _acceptance[tag] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for tag in sorted(_acceptance):
        terminalreporter.write_line(f"{tag} {_acceptance[tag]}")
