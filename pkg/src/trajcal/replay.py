"""Robot replay targets and origin-aligned trajectory normalisation.

Transform naming follows ``t_<from>_<to>`` = pose of frame ``<to>`` expressed
in frame ``<from>``; with the hand-eye convention of :mod:`trajcal.calib`,
``t_tcp_unity`` is the ``X`` solved from (TCP motion, headset motion) pairs
and ``t_unity_opti`` the ``X`` solved from (headset motion, mocap motion)
pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import EmptyTrajectory
from .geom import IDENTITY, Pose, compose, compose_arr, inverse
from .textio import format_kv, format_pose, parse_kv, parse_pose
from .traj import LHS, Trajectory, dilute, increments_arrays, map_poses

DEFAULT_DILUTION_K = 10
DEFAULT_EEF_STEP_M = 0.03


@dataclass(frozen=True, eq=False)
class ReplayConfig:
    b_start: Pose = IDENTITY
    t_tcp_unity: Pose = IDENTITY
    t_unity_opti: Pose = IDENTITY
    dilution_k: int = DEFAULT_DILUTION_K
    eef_step_m: float = DEFAULT_EEF_STEP_M

    def __post_init__(self):
        if self.dilution_k < 1:
            raise ValueError("dilution_k must be >= 1")
        if self.eef_step_m <= 0:
            raise ValueError("eef_step_m must be positive")

    @property
    def a_chain(self) -> Pose:
        """TCP-to-mocap-body transform, ``t_tcp_unity @ t_unity_opti``."""
        return compose(self.t_tcp_unity, self.t_unity_opti)

    def to_text(self) -> str:
        return format_kv([
            ("b_start", format_pose(self.b_start)),
            ("t_tcp_unity", format_pose(self.t_tcp_unity)),
            ("t_unity_opti", format_pose(self.t_unity_opti)),
            ("dilution_k", self.dilution_k),
            ("eef_step_m", f"{self.eef_step_m:g}"),
        ])

    @classmethod
    def from_text(cls, text: str) -> ReplayConfig:
        kv = parse_kv(text)
        unknown = set(kv) - {"b_start", "t_tcp_unity", "t_unity_opti", "dilution_k", "eef_step_m"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: parse_pose(kv[k]) for k in ("b_start", "t_tcp_unity", "t_unity_opti") if k in kv}
        if "dilution_k" in kv:
            kw["dilution_k"] = int(kv["dilution_k"])
        if "eef_step_m" in kv:
            kw["eef_step_m"] = float(kv["eef_step_m"])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> ReplayConfig:
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class SpacingReport:
    """Step ``i`` is the distance from waypoint ``i - 1`` to waypoint ``i``."""

    max_step_m: float
    violations: list[tuple[int, float]] = field(default_factory=list)
    eef_step_m: float = DEFAULT_EEF_STEP_M

    @property
    def ok(self) -> bool:
        return not self.violations


def conjugate_increments(deltas, a_chain: Pose) -> list[Pose]:
    """``a_chain @ d @ inverse(a_chain)`` for each increment ``d``."""
    a_inv = inverse(a_chain)
    return [compose(compose(a_chain, d), a_inv) for d in deltas]


def compute_tcp_targets(opti_traj: Trajectory, cfg: ReplayConfig) -> Trajectory:
    """TCP target poses reproducing a recorded mocap head trajectory.

    ``T_i = B @ t_tcp_unity @ t_unity_opti @ dO_i @ inv(t_unity_opti) @ inv(t_tcp_unity)``
    where ``dO_i = inv(O_0) @ O_i`` on the diluted trajectory.
    """
    if len(opti_traj) == 0:
        raise EmptyTrajectory("mocap trajectory is empty")
    if opti_traj.handedness == LHS:
        raise ValueError("mocap trajectory must be right-handed")
    src = dilute(opti_traj, cfg.dilution_k)
    dt, dq = increments_arrays(src)
    left = compose(compose(cfg.b_start, cfg.t_tcp_unity), cfg.t_unity_opti)
    right = compose(inverse(cfg.t_unity_opti), inverse(cfg.t_tcp_unity))
    t, q = compose_arr(left.t, left.q, dt, dq)
    t, q = compose_arr(t, q, right.t, right.q)
    # dO_0 is the identity, so the first target is B itself
    t[0] = cfg.b_start.t
    q[0] = cfg.b_start.q
    return replace(src, t=t, q=q, frame="robot_base")


def normalize_ground_truth(tcp_traj: Trajectory) -> Trajectory:
    """``GT_i = inv(TCP_0) @ TCP_i``."""
    if len(tcp_traj) == 0:
        raise EmptyTrajectory("TCP trajectory is empty")
    t, q = increments_arrays(tcp_traj)
    return replace(tcp_traj, t=t, q=q, frame="origin")


def normalize_estimate(unity_traj_rhs: Trajectory, t_unity_tcp: Pose) -> Trajectory:
    """``P_i = t_unity_tcp @ inv(U_0) @ U_i @ inv(t_unity_tcp)``.

    Pass the hand-eye ``X`` solved from (TCP motion, headset motion) pairs;
    with that convention ``P_i`` equals the ground-truth increment for a
    perfect headset.
    """
    if len(unity_traj_rhs) == 0:
        raise EmptyTrajectory("headset trajectory is empty")
    if unity_traj_rhs.handedness == LHS:
        raise ValueError("headset trajectory must be converted to right-handed first")
    t, q = increments_arrays(unity_traj_rhs)
    out = map_poses(unity_traj_rhs.with_poses(t, q), left=t_unity_tcp, right=inverse(t_unity_tcp))
    t, q = np.array(out.t), np.array(out.q)
    t[0] = 0.0
    q[0] = (0.0, 0.0, 0.0, 1.0)
    return replace(out, t=t, q=q, frame="origin")


def validate_waypoint_spacing(traj: Trajectory, eef_step_m: float = DEFAULT_EEF_STEP_M) -> SpacingReport:
    if eef_step_m <= 0:
        raise ValueError("eef_step_m must be positive")
    if len(traj) < 2:
        return SpacingReport(0.0, [], eef_step_m)
    d = np.diff(traj.t, axis=0)
    steps = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])
    bad = np.flatnonzero(steps > eef_step_m)
    return SpacingReport(float(steps.max()), [(int(i) + 1, float(steps[i])) for i in bad], eef_step_m)
