import pytest
from hypothesis import settings

from noma_impulsive.config import make_scenario

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def awgn_10db():
    """M = 3, unit powers, R = 0.5, p = 0, rho_w = 10 dB."""
    return make_scenario(p=0.0, gamma=100.0, rho_w_db=10.0)


@pytest.fixture
def impulsive_10db():
    return make_scenario(p=0.01, gamma=100.0, rho_w_db=10.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
