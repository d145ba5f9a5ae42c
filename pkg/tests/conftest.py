"""Shared fixtures.

The full-size studies are expensive (about ten seconds each), so they are
built once per session and shared by the regression and acceptance tests.
Seeds were fixed before any acceptance run and are never tuned.
"""

import warnings

import pytest

from thicknull.priors import ContinuousUniform, TruncatedNormal
from thicknull.simulation import DEFAULT_METHODS, main_scenario, normal_mu_scenario, run_study

MAIN_SEED = 2021
NORMAL_MU_SEED = 2022
MU_SD = 50 / 12 ** 0.5

ACCEPTANCE_LOG = []


@pytest.fixture(scope="session")
def main_study():
    return run_study(main_scenario(MAIN_SEED))


@pytest.fixture(scope="session")
def normal_mu_study():
    methods = DEFAULT_METHODS[:-1] + ("thick_t_flat", "thick_t_normal")
    priors = {"thick_t_flat": ContinuousUniform(), "thick_t_normal": TruncatedNormal(100.0, MU_SD)}
    return run_study(normal_mu_scenario(NORMAL_MU_SEED), methods, priors)


@pytest.fixture(scope="session")
def small_study():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return run_study(main_scenario(11, cases=4000))


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LOG


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LOG):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
