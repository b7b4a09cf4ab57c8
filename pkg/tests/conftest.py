import pytest

from uavmec.model import ComputeParams, RadioParams, Task, UavTrajectory, UePosition
from uavmec.scenario import Instance, Ue

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_instance(ues, uavs=((0.0, 0.0),), *, radius=800.0, altitude=350.0, slots=12,
                  radio=None, **compute):
    """Build an instance from ``(x, y, data_bits, cycles)`` tuples and UAV centers."""
    return Instance(
        tuple(Ue(UePosition(x, y), Task(d, f)) for x, y, d, f in ues),
        tuple(UavTrajectory(cx, cy, radius, altitude, slots) for cx, cy in uavs),
        radio or RadioParams(),
        ComputeParams(**compute),
    )
