import numpy as np
import pytest

from slabspdc.modes import SlabGeometry, dispersion_curve, taylor_coefficients
from slabspdc.spectrum import TriModeChannel

LAMBDA_P = 0.775


@pytest.fixture(scope="session")
def geometry():
    return SlabGeometry(H=1.0, n_c=3.6, n_cl=3.5)


@pytest.fixture(scope="session")
def curves(geometry):
    return {mu: dispersion_curve(geometry, mu, 0.6, 1.9, 261) for mu in (0, 1)}


@pytest.fixture(scope="session")
def coeffs_101(curves):
    return taylor_coefficients(curves[1], curves[0], curves[1], LAMBDA_P)


@pytest.fixture(scope="session")
def coeffs_110(curves):
    return taylor_coefficients(curves[1], curves[1], curves[0], LAMBDA_P)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture(scope="session")
def channels():
    return TriModeChannel(1, 0, 1), TriModeChannel(1, 1, 0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
