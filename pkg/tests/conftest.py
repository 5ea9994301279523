import numpy as np
import pytest

from discoverability import catalog
from discoverability.integrate import IntegratorConfig, flow


@pytest.fixture(scope="session")
def lorenz_long():
    """10^6 post-burn Lorenz samples (t_burn=100, dt=0.01)."""
    cfg = IntegratorConfig(t_end=10_100.0 - 0.01, t_burn=100.0, dt_sample=0.01)
    return flow(catalog.get("lorenz"), [1.0, 1.0, 1.0], cfg)


@pytest.fixture(scope="session")
def sho_circle():
    """Unit circle traced by the harmonic oscillator from (1, 0)."""
    return flow(catalog.get("sho"), [1.0, 0.0], IntegratorConfig(t_end=50.0))


@pytest.fixture(scope="session")
def sho_long_circle():
    return flow(catalog.get("sho"), [1.0, 0.0], IntegratorConfig(t_end=200.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERIA = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1][len("test_"):]
        CRITERIA[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(CRITERIA, key=lambda n: int(n.split("_")[1])):
        terminalreporter.write_line(f"{CRITERIA[name]}  {name}")
