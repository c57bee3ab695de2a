import pytest

from qeccal.catalog import catalog_for
from qeccal.code_model import build_layout, build_schedule


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow Monte-Carlo checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte-Carlo acceptance checks (use --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def layout3():
    return build_layout(3)


@pytest.fixture(scope="session")
def schedule_d3n4(layout3):
    return build_schedule(layout3, 4, "Z")


@pytest.fixture(scope="session")
def catalog_d3(schedule_d3n4):
    return catalog_for(schedule_d3n4)


def idle_location(schedule, qubit, cycle, phase="P.Z.rot1"):
    for loc in schedule.locations:
        if loc.slot == "idle" and loc.qubits == (qubit,) and loc.cycle == cycle and loc.phase.startswith(phase):
            return loc.id
    raise LookupError(f"no idle location for {qubit} in cycle {cycle} ({phase})")


def cz_location(schedule, ancilla, data, cycle):
    for loc in schedule.locations:
        if loc.slot == "cz" and loc.qubits == (ancilla, data) and loc.cycle == cycle:
            return loc.id
    raise LookupError(f"no CZ between {ancilla} and {data} in cycle {cycle}")
