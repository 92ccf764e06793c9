import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (test name, outcome)
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    marks = [m.args[0] for m in item.iter_markers("criterion")]
    if not marks:
        return
    k = marks[0]
    if report.when == "call" or report.outcome != "passed":
        prev = _CRITERIA.get(k, (item.name, "passed"))[1]
        _CRITERIA[k] = (item.name, "failed" if "failed" in (prev, report.outcome) else report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        name, outcome = _CRITERIA[k]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {k}: {status}  {name}")
