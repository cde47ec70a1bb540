"""Shared pytest hooks: the acceptance run ends with one line per criterion."""

from __future__ import annotations

import re

import pytest

_DETAILS: dict[int, str] = {}
_RESULTS: dict[int, str] = {}

_CRITERION_RE = re.compile(r"test_criterion_(\d+)")


def record(criterion: int, detail: str) -> None:
    """Stash the measured detail for one acceptance criterion."""
    _DETAILS[criterion] = detail


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    match = _CRITERION_RE.match(item.name)
    if match and report.when == "call":
        _RESULTS[int(match.group(1))] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status = "PASS" if _RESULTS[n] == "passed" else "FAIL"
        detail = _DETAILS.get(n)
        line = f"criterion {n}: {status}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
