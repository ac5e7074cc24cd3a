import re
from collections import defaultdict

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_outcomes = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = _CRITERION.match(item.name)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[int(m.group(1))].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {number}: {status} ({len(results) - len(failed)}/{len(results)} checks passed)"
        if failed:
            line += " failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
