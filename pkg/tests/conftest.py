import pytest

from cavitynet import config as C
from cavitynet.cavity import CavityAtomParams, PulseProfile, TransferConfig
from cavitynet.units import mhz2pi

ION = CavityAtomParams(g_A=mhz2pi(5.8), g_B=mhz2pi(5.8), kappa=mhz2pi(0.340), gamma=mhz2pi(25.0))


@pytest.fixture(scope="session")
def ion_doc():
    return C.resolve("ion_barium")


@pytest.fixture(scope="session")
def rydberg_doc():
    return C.resolve("rydberg_rb")


@pytest.fixture(scope="session")
def ion_cfg():
    return TransferConfig(ION, PulseProfile(mhz2pi(18.0), 1.0e-6))


# Acceptance report: one line per criterion, printed after the run.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
