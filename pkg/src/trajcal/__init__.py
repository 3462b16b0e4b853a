"""Trajectory calibration and evaluation for 6-DoF tracking accuracy studies.

Modules: :mod:`~trajcal.geom` (pose algebra), :mod:`~trajcal.traj` (TUM
trajectories), :mod:`~trajcal.sync` (clock offsets), :mod:`~trajcal.calib`
(hand-eye AX=XB), :mod:`~trajcal.replay` (robot targets, normalisation),
:mod:`~trajcal.metrics` (APE), :mod:`~trajcal.synth` (synthetic scenarios).
"""

from ._kernels import BACKEND
from .errors import TrajcalError
from .geom import Pose, compose, interpolate_pose, inverse, lhs_to_rhs, slerp
from .traj import Trajectory, parse_tum, read_tum, save_tum, write_tum

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "TrajcalError", "Pose", "compose", "inverse", "slerp", "interpolate_pose",
    "lhs_to_rhs", "Trajectory", "parse_tum", "write_tum", "read_tum", "save_tum",
]
