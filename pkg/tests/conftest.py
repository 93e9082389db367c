import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
ROOT = TESTS.parent
sys.path.insert(0, str(TESTS))

from satfr.cli_io import load_scenario  # noqa: E402


@pytest.fixture(scope="session")
def scenario_dir():
    return ROOT / "scenarios"


@pytest.fixture(scope="session")
def default_scenario(scenario_dir):
    return load_scenario(scenario_dir / "default.json")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT_LINES
    if REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
