import numpy as np
import pytest
from hypothesis import settings

from adasmooth import LinearGaussianHmm, StochasticVolatilityModel

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

LG_PARAMS = (0.7, 1.0, 0.2, 1.0)
SV_PARAMS = (0.975, 0.641, 0.165, -0.1)

# criterion number -> (passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def lg():
    return LinearGaussianHmm(*LG_PARAMS)


@pytest.fixture
def sv():
    return StochasticVolatilityModel(*SV_PARAMS)


@pytest.fixture
def lg_data(lg):
    return lg.with_observations(lg.simulate(41, 11).observations)


@pytest.fixture
def sv_data(sv):
    return sv.with_observations(sv.simulate(41, 12).observations)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
