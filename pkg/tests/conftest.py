import sys
from pathlib import Path

import pytest

from pollsim import engine, scenario
from pollsim.frames import Role, StationId
from pollsim.scenario import ScenarioConfig, SessionSpec

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(Path(__file__).parent))


def make_testbed(**kw) -> ScenarioConfig:
    """Master 0, regulars 1-3, monitor 4, one 250 kbps video 1 -> 2."""
    stations = [StationId(0, Role.MASTER), StationId(1), StationId(2), StationId(3),
                StationId(4, Role.MONITOR)]
    sessions = [SessionSpec(1, "video", 1, 2, rate_kbps=250)]
    kw.setdefault("duration_s", 10)
    return ScenarioConfig(stations=kw.pop("stations", stations),
                          sessions=kw.pop("sessions", sessions), **kw)


@pytest.fixture
def cfg():
    return make_testbed()


@pytest.fixture(scope="session")
def scenario_250():
    return scenario.load(ROOT / "scenarios" / "testbed_250.yaml")


@pytest.fixture(scope="session")
def scenario_400():
    return scenario.load(ROOT / "scenarios" / "testbed_400.yaml")


@pytest.fixture(scope="session")
def sweep_250(scenario_250):
    return engine.sweep(scenario_250, range(7), ["polled", "contention"])


@pytest.fixture(scope="session")
def sweep_400(scenario_400):
    return engine.sweep(scenario_400, range(7), ["contention"])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
