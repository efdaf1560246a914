"""Shared fixtures: the two qubit preset schedules with their tracks.

Tracks are immutable once built, so session scope is safe and keeps the
eigensolver work out of every individual test.
"""

import math

import pytest

from adialab import schedule, spectral

GEO_THETA = 1.0
LIN_THETA = math.pi / 2

# Pass/fail lines recorded by the acceptance tests, echoed after the run.
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def geo_pair():
    sched = schedule.QubitGeodesic(GEO_THETA, 0.0)
    return sched, spectral.track(sched, 0, 2001)


@pytest.fixture(scope="session")
def lin_pair():
    sched = schedule.qubit_linear(LIN_THETA, 0.0)
    return sched, spectral.track(sched, 0, 2001)


@pytest.fixture(scope="session")
def geo_shifted(geo_pair):
    sched, trk = geo_pair
    shifted = spectral.shift_schedule(sched, trk)
    return shifted, spectral.track(shifted, 0, 2001)


@pytest.fixture(scope="session")
def lin_shifted(lin_pair):
    sched, trk = lin_pair
    shifted = spectral.shift_schedule(sched, trk)
    return shifted, spectral.track(shifted, 0, 2001)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
