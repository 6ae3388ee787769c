import re

_CRITERIA = {}
_NAME = re.compile(r"test_criterion_(\d+)_")


def pytest_runtest_logreport(report):
    m = _NAME.search(report.nodeid)
    if not m or report.when not in ("setup", "call"):
        return
    key = int(m.group(1))
    if report.failed or report.when == "call":
        _CRITERIA.setdefault(key, report.outcome)
        if report.failed:
            _CRITERIA[key] = "failed"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        verdict = "PASS" if _CRITERIA[key] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {key:2d}: {verdict}")
