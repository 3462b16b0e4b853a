"""Trajectory container, TUM I/O and sample-level operations.

A TUM row is ``timestamp x y z q_x q_y q_z q_w``, space separated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (
    BadQuaternion,
    EmptyAssociation,
    EmptyResult,
    MalformedRow,
    NonMonotonicTimestamps,
    OutOfRange,
)
from .geom import (
    Pose,
    canonical_quat_arr,
    compose_arr,
    inverse_arr,
)

LHS = "LHS"
RHS = "RHS"

# |‖q‖ - 1| accepted on ingest before renormalising
QUAT_INGEST_TOL = 1e-3
TUM_DECIMALS = 9


@dataclass(frozen=True)
class TimedPose:
    stamp: float
    pose: Pose


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered stamped poses stored column-wise.

    ``stamps`` is ``(N,)`` seconds, ``t`` is ``(N, 3)`` metres and ``q`` is
    ``(N, 4)`` unit quaternions in xyzw order. Arrays are read-only.
    """

    stamps: np.ndarray
    t: np.ndarray
    q: np.ndarray
    frame: str = "world"
    handedness: str = RHS
    nominal_rate_hz: float | None = None
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        stamps = np.array(self.stamps, dtype=float).reshape(-1)
        n = len(stamps)
        t = np.array(self.t, dtype=float).reshape(n, 3)
        q = np.array(self.q, dtype=float).reshape(n, 4)
        if self.handedness not in (LHS, RHS):
            raise ValueError(f"handedness must be {LHS!r} or {RHS!r}, got {self.handedness!r}")
        if not (np.all(np.isfinite(stamps)) and np.all(np.isfinite(t)) and np.all(np.isfinite(q))):
            raise ValueError("trajectory contains non-finite values")
        if n and stamps.min() < 0.0:
            raise ValueError("timestamps must be >= 0")
        if n > 1:
            bad = np.flatnonzero(np.diff(stamps) <= 0.0)
            if len(bad):
                i = int(bad[0])
                raise NonMonotonicTimestamps(
                    f"stamp {stamps[i + 1]!r} at index {i + 1} does not exceed {stamps[i]!r}"
                )
        norms = np.linalg.norm(q, axis=1)
        if n and norms.min() < 1e-12:
            raise BadQuaternion("zero quaternion in trajectory")
        off = np.abs(norms - 1.0) > 1e-12
        if np.any(off):
            q[off] /= norms[off, None]
        for name, arr in (("stamps", stamps), ("t", t), ("q", q)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "comments", tuple(self.comments))

    @classmethod
    def from_poses(cls, stamps, poses, **kwargs) -> Trajectory:
        poses = list(poses)
        t = np.array([p.t for p in poses]).reshape(-1, 3)
        q = np.array([p.q for p in poses]).reshape(-1, 4)
        return cls(stamps, t, q, **kwargs)

    def __len__(self) -> int:
        return len(self.stamps)

    def __getitem__(self, i: int) -> TimedPose:
        return TimedPose(float(self.stamps[i]), self.pose(i))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def pose(self, i: int) -> Pose:
        return Pose(self.t[i], self.q[i])

    def poses(self) -> list[Pose]:
        return [self.pose(i) for i in range(len(self))]

    def with_poses(self, t, q) -> Trajectory:
        return replace(self, t=t, q=q)

    def take(self, idx) -> Trajectory:
        return replace(self, stamps=self.stamps[idx], t=self.t[idx], q=self.q[idx])

    @property
    def duration(self) -> float:
        return float(self.stamps[-1] - self.stamps[0]) if len(self) else 0.0

    def sample_period(self) -> float | None:
        if self.nominal_rate_hz:
            return 1.0 / self.nominal_rate_hz
        if len(self) < 2:
            return None
        return float(np.median(np.diff(self.stamps)))


@dataclass(frozen=True)
class AssociationSet:
    """Index pairs between two trajectories with their absolute stamp gaps."""

    ia: np.ndarray
    ib: np.ndarray
    dt: np.ndarray
    max_dt: float

    @property
    def pairs(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(d)) for i, j, d in zip(self.ia, self.ib, self.dt)]

    def __len__(self) -> int:
        return len(self.ia)


# ---------------------------------------------------------------------------
# TUM I/O

def parse_tum(text: str, *, frame: str = "world", handedness: str = RHS,
              nominal_rate_hz: float | None = None) -> Trajectory:
    rows = []
    comments = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        fields = line.split()
        if len(fields) != 8:
            raise MalformedRow(f"line {lineno}: expected 8 fields, got {len(fields)}")
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise MalformedRow(f"line {lineno}: non-numeric field in {line!r}") from None
        if not all(math.isfinite(v) for v in values):
            raise MalformedRow(f"line {lineno}: non-finite field in {line!r}")
        norm = math.sqrt(sum(v * v for v in values[4:]))
        if abs(norm - 1.0) > QUAT_INGEST_TOL:
            raise BadQuaternion(f"line {lineno}: quaternion norm {norm:.6g}")
        if rows and values[0] <= rows[-1][0]:
            raise NonMonotonicTimestamps(
                f"line {lineno}: stamp {fields[0]} does not exceed previous stamp"
            )
        rows.append(values)
    data = np.array(rows, dtype=float).reshape(-1, 8)
    return Trajectory(data[:, 0], data[:, 1:4], data[:, 4:8], frame=frame,
                      handedness=handedness, nominal_rate_hz=nominal_rate_hz,
                      comments=tuple(comments))


def write_tum(traj: Trajectory) -> str:
    """Render as TUM text, 9 decimals per field, quaternion sign canonicalised."""
    q = canonical_quat_arr(traj.q) if len(traj) else traj.q
    data = np.column_stack([traj.stamps, traj.t, q]) + 0.0  # -0.0 -> 0.0
    fmt = f"%.{TUM_DECIMALS}f"
    return "".join(" ".join(fmt % v for v in row) + "\n" for row in data)


def read_tum(path, **kwargs) -> Trajectory:
    return parse_tum(Path(path).read_text(), **kwargs)


def save_tum(path, traj: Trajectory) -> None:
    Path(path).write_text(write_tum(traj))


# ---------------------------------------------------------------------------
# sampling

def dilute(traj: Trajectory, k: int) -> Trajectory:
    """Keep every ``k``-th sample starting with the first."""
    if k < 1:
        raise ValueError("dilution factor must be >= 1")
    rate = traj.nominal_rate_hz / k if traj.nominal_rate_hz else None
    return replace(traj.take(slice(None, None, k)), nominal_rate_hz=rate)


def resample(traj: Trajectory, stamps) -> Trajectory:
    """Interpolate ``traj`` at every stamp in ``stamps`` (lerp translation, slerp rotation)."""
    stamps = np.asarray(stamps, dtype=float).reshape(-1)
    if len(traj) == 0:
        raise OutOfRange("cannot sample an empty trajectory")
    if len(stamps) and (stamps.min() < traj.stamps[0] or stamps.max() > traj.stamps[-1]):
        raise OutOfRange(
            f"requested stamps [{stamps.min():.9f}, {stamps.max():.9f}] outside "
            f"[{traj.stamps[0]:.9f}, {traj.stamps[-1]:.9f}]"
        )
    t, q = _kernels.resample_poses(traj.stamps, traj.t, traj.q, stamps)
    return replace(traj, stamps=stamps, t=t, q=q, nominal_rate_hz=None)


def sample_at(traj: Trajectory, t: float) -> Pose:
    r = resample(traj, [t])
    return Pose(r.t[0], r.q[0])


def default_max_dt(a: Trajectory, b: Trajectory) -> float:
    """Half the coarser of the two sample periods."""
    periods = [p for p in (a.sample_period(), b.sample_period()) if p is not None]
    if not periods:
        raise ValueError("max_dt is required when both trajectories have a single sample")
    return 0.5 * max(periods)


def associate(a: Trajectory, b: Trajectory, max_dt: float | None = None) -> AssociationSet:
    """Pair samples whose stamps are mutual nearest neighbours within ``max_dt``.

    Pairs are monotone in time and each sample is used at most once.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptyAssociation("cannot associate an empty trajectory")
    if max_dt is None:
        max_dt = default_max_dt(a, b)
    ia, ib = _kernels.associate_nearest(a.stamps, b.stamps, max_dt)
    if len(ia) == 0:
        raise EmptyAssociation(
            f"no stamps within {max_dt * 1e3:.3f} ms: a spans [{a.stamps[0]:.3f}, {a.stamps[-1]:.3f}], "
            f"b spans [{b.stamps[0]:.3f}, {b.stamps[-1]:.3f}]"
        )
    return AssociationSet(ia, ib, np.abs(b.stamps[ib] - a.stamps[ia]), max_dt)


def trim(traj: Trajectory, t0: float, t1: float) -> Trajectory:
    if not t0 < t1:
        raise ValueError("trim window needs t0 < t1")
    keep = (traj.stamps >= t0) & (traj.stamps <= t1)
    if not np.any(keep):
        raise EmptyResult(f"no samples within [{t0}, {t1}]")
    return traj.take(keep)


# ---------------------------------------------------------------------------
# pose-level transforms over whole trajectories

def increments_arrays(traj: Trajectory):
    """``(t, q)`` of ``inverse(O_0) @ O_i`` for every sample."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    it, iq = inverse_arr(traj.t[0], traj.q[0])
    t, q = compose_arr(it, iq, traj.t, traj.q)
    t[0] = 0.0
    q[0] = (0.0, 0.0, 0.0, 1.0)
    return t, q


def increments_from_start(traj: Trajectory) -> list[Pose]:
    t, q = increments_arrays(traj)
    return [Pose(t[i], q[i]) for i in range(len(t))]


def relative_arrays(traj: Trajectory, stride: int = 1):
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if len(traj) < stride + 1:
        raise ValueError(f"need at least {stride + 1} samples for stride {stride}")
    it, iq = inverse_arr(traj.t[:-stride], traj.q[:-stride])
    return compose_arr(it, iq, traj.t[stride:], traj.q[stride:])


def relative_motions(traj: Trajectory, stride: int = 1) -> list[Pose]:
    """``inverse(O_i) @ O_{i+stride}`` for every valid ``i``."""
    t, q = relative_arrays(traj, stride)
    return [Pose(t[i], q[i]) for i in range(len(t))]


def map_poses(traj: Trajectory, left: Pose | None = None, right: Pose | None = None) -> Trajectory:
    """Return the trajectory with every pose replaced by ``left @ P_i @ right``."""
    t, q = traj.t, traj.q
    if left is not None:
        t, q = compose_arr(left.t, left.q, t, q)
    if right is not None:
        t, q = compose_arr(t, q, right.t, right.q)
    return traj.with_poses(t, q)


def _mirror(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    t = np.array(traj.t)
    q = np.array(traj.q)
    t[:, 1] *= -1.0
    q[:, 1] *= -1.0
    q[:, 3] *= -1.0
    return t, q


def to_rhs(traj: Trajectory) -> Trajectory:
    """Convert a left-handed (Y-flipped) trajectory to right-handed."""
    if traj.handedness != LHS:
        raise ValueError("trajectory is not tagged left-handed")
    t, q = _mirror(traj)
    return replace(traj, t=t, q=q, handedness=RHS)


def to_lhs(traj: Trajectory) -> Trajectory:
    """Inverse of :func:`to_rhs` (the same mirror, opposite tag)."""
    if traj.handedness != RHS:
        raise ValueError("trajectory is not tagged right-handed")
    t, q = _mirror(traj)
    return replace(traj, t=t, q=q, handedness=LHS)


__all__ = [
    "LHS", "RHS", "TimedPose", "Trajectory", "AssociationSet",
    "parse_tum", "write_tum", "read_tum", "save_tum",
    "dilute", "resample", "sample_at", "associate", "default_max_dt", "trim",
    "increments_from_start", "increments_arrays", "relative_motions", "relative_arrays",
    "map_poses", "to_rhs", "to_lhs",
]
