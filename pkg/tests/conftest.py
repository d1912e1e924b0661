import math

import pytest

from wariness import EconomyConfig, Preferences, ProductionSpec

INF = math.inf


def economy(n, beta, gamma, A, a, rho, B=0.0):
    return EconomyConfig(n, Preferences(beta, gamma), ProductionSpec(A, a, rho, B))


ECONOMIES = {
    "three_equilibria": dict(n=1.1, beta=0.7, gamma=INF, A=3.0, a=0.3, rho=-3.0),
    "cross_regime": dict(n=1.32, beta=0.7, gamma=0.255, A=3.4, a=0.4, rho=-3.0),
    "max_min_two_states": dict(n=1.1, beta=0.7, gamma=INF, A=3.6, a=0.3, rho=-0.6),
    "max_min_near_tangency": dict(n=1.1, beta=0.7, gamma=INF, A=2.973, a=0.3, rho=-0.6),
    "max_min_collapse": dict(n=1.1, beta=0.7, gamma=INF, A=2.0, a=0.3, rho=-0.6),
    "intermediate": dict(n=1.32, beta=0.7, gamma=0.54, A=3.3, a=0.3, rho=-0.9),
    "no_wariness_a035": dict(n=1.05, beta=0.75, gamma=0.0, A=6.6, a=0.35, rho=-1.0),
    "no_wariness_a065": dict(n=1.05, beta=0.75, gamma=0.0, A=6.6, a=0.65, rho=-1.0),
}


@pytest.fixture
def econ_by_name():
    return lambda name, **kw: economy(**{**ECONOMIES[name], **kw})


# -- one pass/fail line per acceptance criterion ---------------------------------

_criteria: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        _criteria[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split("_")[2])):
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"{_criteria[name]}  criterion {name.split('_')[2]}: {label}")
