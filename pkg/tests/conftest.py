import pytest

from pmplan.lifetime import DiscreteWeibull
from pmplan.renewal import OneComponentEconomics
from pmplan.scenario import load_bundled
from pmplan.system import SystemModel

#: Lines collected by the acceptance suite, printed once at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def table1():
    return load_bundled("table1")


@pytest.fixture(scope="session")
def spec(table1):
    return table1.system


@pytest.fixture(scope="session")
def model(spec):
    return SystemModel.build(spec)


@pytest.fixture(scope="session")
def rotor_econ(spec):
    return spec.economics(spec.index("rotor"))


@pytest.fixture(scope="session")
def generator_econ(spec):
    return spec.economics(spec.index("generator"))


@pytest.fixture
def small_econ():
    """A short-lived unit whose optimal replacement age fits in a 40-month horizon."""
    return OneComponentEconomics(30.0, 6.0, 0.2, DiscreteWeibull(0.004, 2.5))
