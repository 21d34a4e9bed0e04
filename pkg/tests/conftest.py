import os
import sys
import warnings

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hydronozzle.errors import SignConditionViolated  # noqa: E402
from hydronozzle.geometry import make_geometry  # noqa: E402
from hydronozzle.profiles import build_profile, vorticity_source  # noqa: E402

import corpus  # noqa: E402


@pytest.fixture(scope="session")
def quartic():
    return build_profile("quartic_bump")


@pytest.fixture(scope="session")
def quartic_src(quartic):
    return vorticity_source(quartic)


@pytest.fixture(scope="session")
def sinh_src():
    return corpus.sinh_source()


@pytest.fixture(scope="session")
def bump_geometry():
    return make_geometry("bump", cutoff=8.0, a=0.2, sigma=1.5)


@pytest.fixture
def no_sign_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SignConditionViolated)
        yield


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
