import numpy as np
import pytest

from ladder_eit import (EITModel, LadderParams, LorentzianDistribution, MultiIsotopeSystem,
                        builtin_strontium_catalog)

# Figure-3 operating point, MHz and m/s.
FIG3 = dict(gamma3=3.5, rabi_c=7.5, delta_c=20.0)
FIG3_DELTA_V = 16.5


@pytest.fixture(scope="session")
def sr():
    return builtin_strontium_catalog()


@pytest.fixture(scope="session")
def fig3_params():
    return LadderParams(**FIG3)


@pytest.fixture(scope="session")
def fig3_system(sr, fig3_params):
    return MultiIsotopeSystem(sr, fig3_params, LorentzianDistribution(FIG3_DELTA_V, 0.4))


@pytest.fixture(scope="session")
def fig3_model(sr):
    return EITModel(sr, LadderParams())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    lines = sorted(config.acceptance_lines)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
