import math
import sys

import numpy as np
import pytest

from trajcal.geom import Pose, rotvec_to_quat
from trajcal.traj import Trajectory


def random_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def random_pose(rng, scale=1.0):
    return Pose(rng.normal(scale=scale, size=3), random_quat(rng))


def random_traj(rng, n, rate=30.0, start=1000.0, canonical=False):
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    if canonical:
        q[q[:, 3] < 0] *= -1
    return Trajectory(start + np.arange(n) / rate, rng.normal(scale=0.5, size=(n, 3)), q,
                      nominal_rate_hz=rate)


def rot_z(deg):
    return rotvec_to_quat([0.0, 0.0, math.radians(deg)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(line)
