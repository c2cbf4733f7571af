import numpy as np
import pytest

from resetfreq.presets import (
    cglp_pid_case_study,
    closed_loop_demo,
    multiple_reset_demo,
    open_loop_demo,
    pid_case_study,
    shaped_cglp_pid_case_study,
)


@pytest.fixture(scope="session")
def demo_open():
    return open_loop_demo()


@pytest.fixture(scope="session")
def demo_closed():
    return closed_loop_demo()


@pytest.fixture(scope="session")
def case_pid():
    return pid_case_study()


@pytest.fixture(scope="session")
def case_cglp():
    return cglp_pid_case_study()


@pytest.fixture(scope="session")
def case_shaped():
    return shaped_cglp_pid_case_study()


@pytest.fixture(scope="session")
def overreset_demo():
    return multiple_reset_demo()


def assert_rel(actual, expected, tol, label=""):
    scale = max(abs(expected), 1e-300)
    err = abs(actual - expected) / scale
    assert err <= tol, f"{label}: {actual} vs {expected} (rel err {err:.3e} > {tol:g})"


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
