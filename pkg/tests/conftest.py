import sys

import numpy as np
import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion after the run."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "SCOREBOARD", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

from wedgeq import (
    ErrorCurve,
    ManualRoute,
    ReworkModel,
    RiskMap,
    SignalEnvironment,
)


@pytest.fixture
def manual():
    return ManualRoute(tau_H=1.0, c2_H=0.10)


@pytest.fixture
def curve():
    # Flat residual curve: p(r) = 0.15 for every r.
    return ErrorCurve(p0=0.15, p_inf=0.15, kappa=2.0)


@pytest.fixture
def rework():
    return ReworkModel(mu_R=7.0 / 3.0, mu_R2=6.8375)


@pytest.fixture
def policy_rework():
    return ReworkModel(mu_R=1.5, mu_R2=4.0)


@pytest.fixture
def risk_map():
    return RiskMap(a=0.02, b=0.88, g=10.0, s0=0.55)


def _env(risk_map, alpha, beta, **overrides):
    params = dict(
        risk_map=risk_map, signal_alpha=alpha, signal_beta=beta,
        K=2.0, kappa=2.0, c_w=0.5, p_inf=0.0,
    )
    params.update(overrides)
    return SignalEnvironment(**params)


@pytest.fixture
def env22(risk_map):
    return _env(risk_map, 2.0, 2.0)


@pytest.fixture
def env52(risk_map):
    return _env(risk_map, 5.0, 2.0)


@pytest.fixture
def make_env(risk_map):
    def factory(alpha=2.0, beta=2.0, **overrides):
        return _env(risk_map, alpha, beta, **overrides)

    return factory


@pytest.fixture
def rng():
    return np.random.default_rng(20260813)
