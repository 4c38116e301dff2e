import os

import pytest
from hypothesis import settings

from powerladder import scenario, techdata

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = techdata.default_data_dir()


@pytest.fixture(scope="session")
def registry():
    return techdata.default_registry()


@pytest.fixture(scope="session")
def baseline_config():
    return scenario.read_config(DATA / "baseline.cfg")


@pytest.fixture(scope="session")
def mitigation_config():
    return scenario.read_config(DATA / "mitigation.cfg")


@pytest.fixture(scope="session")
def data(baseline_config):
    return scenario.load_data(baseline_config)


@pytest.fixture(scope="session")
def baseline_run(baseline_config, data):
    return scenario.run(baseline_config, *data)


@pytest.fixture(scope="session")
def mitigation_run(mitigation_config, data):
    return scenario.run(mitigation_config, *data)


# -- acceptance report --------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion.

    ``criterion(n, ok, detail)`` stores the line, prints it and asserts ``ok``.
    """
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
