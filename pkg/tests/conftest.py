import os

import pytest

# lines recorded by the acceptance suite, echoed at the end of the session
ACCEPTANCE: list[str] = []


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SCHELLING_LONG") == "1":
        return
    skip = pytest.mark.skip(reason="long run; set SCHELLING_LONG=1")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
