import math

import pytest

from jumpsim.integrator import IntegratorSettings
from jumpsim.rhomboid import RhomboidConfig, simulate_rhomboid

# One line per acceptance criterion, filled by tests/test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def settings():
    return IntegratorSettings()


@pytest.fixture(scope="session")
def table1():
    return RhomboidConfig.table1()


@pytest.fixture(scope="session")
def table1_run(table1, settings):
    return simulate_rhomboid(table1, settings)


@pytest.fixture
def record_criterion():
    def record(label: str, passed: bool, measured: str, target: str):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"{status}  {label:<44} measured {measured}   target {target}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def deg(x):
    return math.degrees(x)
