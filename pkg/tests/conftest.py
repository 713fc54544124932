import pytest

from nearfield_polar import PhysicalConstants, PolarizationConfig


@pytest.fixture
def constants():
    return PhysicalConstants(eta=1.0, wavelength=0.1)


C33 = PolarizationConfig(3, 3)
C32 = PolarizationConfig(3, 2)
C22 = PolarizationConfig(2, 2)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
