"""Shared instances; building them once keeps the suite fast."""

import pytest

from twistlab.constructions import (family_almost_simple_Sk, family_blowup, family_diagonal,
                                    family_nonfaithful_top, family_trivial_phi)
from twistlab.grouptable import named_table
from twistlab.group import PermGroup


@pytest.fixture(scope="session")
def A5():
    return named_table("A5")


@pytest.fixture(scope="session")
def wr_s2(A5):
    return family_trivial_phi(A5, PermGroup.symmetric(2))


@pytest.fixture(scope="session")
def wr_c3(A5):
    return family_trivial_phi(A5, PermGroup.cyclic(3))


@pytest.fixture(scope="session")
def nonfaithful():
    return family_nonfaithful_top(5, PermGroup.symmetric(2))


@pytest.fixture(scope="session")
def diag(A5):
    return family_diagonal(A5)


@pytest.fixture(scope="session")
def as6():
    return family_almost_simple_Sk(6)


@pytest.fixture(scope="session")
def as7():
    return family_almost_simple_Sk(7)


@pytest.fixture(scope="session")
def blow_c3(wr_c3):
    return family_blowup(wr_c3, PermGroup.symmetric(2))


@pytest.fixture(scope="session")
def blow_diag(diag):
    return family_blowup(diag, PermGroup.symmetric(2))


# -- acceptance log: one line per criterion, printed after the run ----------

_LOG_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(_LOG_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LOG_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
