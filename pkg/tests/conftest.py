"""Shared pytest configuration: per-criterion summary for the acceptance suite."""

import re

_CRITERION = re.compile(r"test_criterion_(\d+)_?(\w*)")

_LABELS = (
    ("passed", "PASS "),
    ("failed", "FAIL "),
    ("error", "ERROR"),
    ("xfailed", "XFAIL"),
    ("xpassed", "XPASS"),
    ("skipped", "SKIP "),
)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome, label in _LABELS:
        for report in terminalreporter.stats.get(outcome, ()):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            match = _CRITERION.search(nodeid)
            if match is None:
                continue
            rows.append((int(match.group(1)), label, match.group(2)))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, name in sorted(rows):
        terminalreporter.write_line(f"criterion {number:02d} {label} {name}")
