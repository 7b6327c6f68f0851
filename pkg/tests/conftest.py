"""Shared pytest wiring for the acceptance summary.

Tests marked ``@pytest.mark.criterion(num, title)`` get one line each in the
terminal summary, so a release run shows every acceptance check and its
verdict at a glance.
"""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, title): acceptance check; prints one summary line per run")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    entry = _RESULTS.setdefault(num, {"title": title, "verdict": "PASS", "note": ""})
    if report.failed:
        entry["verdict"] = "FAIL"
    elif report.skipped:
        entry["verdict"] = "SKIP"
    for name, value in report.user_properties:
        if name == "criterion_note":
            entry["note"] = str(value)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        entry = _RESULTS[num]
        line = f"criterion {num}: {entry['verdict']} - {entry['title']}"
        if entry["note"]:
            line = f"{line} ({entry['note']})"
        terminalreporter.write_line(line)
