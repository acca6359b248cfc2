"""Shared pytest wiring: a per-criterion summary for the acceptance suite."""

from __future__ import annotations

_ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[label] = (
            "PASS" if report.outcome == "passed" else "FAIL",
            report.nodeid,
        )


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for label in sorted(_ACCEPTANCE_RESULTS):
        outcome, _ = _ACCEPTANCE_RESULTS[label]
        terminalreporter.write_line(f"{outcome}: {label}")
