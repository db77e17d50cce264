import numpy as np
import pytest

from morse_ingard.assembly import Formulation, assemble, assemble_blocks
from morse_ingard.mesh import ForkGeometry, fork_domain, unit_square
from morse_ingard.params import derive, qepas_params, rotade_params
from morse_ingard.studies import default_source


@pytest.fixture(scope="session")
def qepas():
    return derive(qepas_params())


@pytest.fixture(scope="session")
def rotade():
    return derive(rotade_params())


@pytest.fixture(scope="session")
def fork():
    return fork_domain(ForkGeometry(), 0.25)


@pytest.fixture(scope="session")
def fork_coarse():
    """Half-resolution fork, for tests that only need a small system."""
    return fork_domain(ForkGeometry(), 0.5)


@pytest.fixture(scope="session")
def system(fork, qepas):
    return assemble(fork, qepas, Formulation.REFORMULATED, default_source())


@pytest.fixture(scope="session")
def small_system(fork_coarse, qepas):
    return assemble(fork_coarse, qepas, Formulation.REFORMULATED, default_source())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.VERDICTS, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
