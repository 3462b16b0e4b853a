"""Deterministic synthetic scenarios with known hand-eye transform and clock offset.

Randomness comes from numpy's ``PCG64`` bit generator seeded through
``SeedSequence``; Gaussian draws use numpy's ziggurat transform. The motion
itself is fixed sinusoids; only phases are seeded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calib import MotionPair
from .geom import (
    IDENTITY,
    Pose,
    compose,
    compose_arr,
    inverse,
    quat_mul_arr,
    rotvec_to_quat,
    rotvec_to_quat_arr,
)
from .textio import format_kv, format_pose, parse_kv, parse_pose
from .traj import Trajectory, save_tum, to_lhs

# Per-axis base frequencies (Hz); the second component of each translation
# axis runs at an irrational multiple so the motion never repeats.
TRANS_FREQ_HZ = (0.23, 0.31, 0.17)
TRANS_RATIO = (math.sqrt(2.0), math.sqrt(3.0), math.sqrt(5.0))
ROT_FREQ_HZ = (0.19, 0.13 * math.sqrt(3.0), 0.11 * math.sqrt(5.0))
DEFAULT_START_STAMP = 1_700_000_000.0


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    seed: int = 0
    duration_s: float = 60.0
    rate_hz: float = 120.0
    trans_amplitude_m: float = 0.15
    rot_amplitude_deg: float = 30.0
    x_true: Pose = IDENTITY
    offset_true_s: float = 0.0
    sigma_t_m: float = 0.0
    sigma_r_deg: float = 0.0
    start_stamp: float = DEFAULT_START_STAMP

    def __post_init__(self):
        if self.rate_hz <= 0 or self.duration_s <= 0:
            raise ValueError("rate and duration must be positive")
        if min(self.trans_amplitude_m, self.rot_amplitude_deg, self.sigma_t_m, self.sigma_r_deg) < 0:
            raise ValueError("amplitudes and sigmas must be >= 0")


@dataclass(frozen=True, eq=False)
class Scenario:
    gt: Trajectory
    sensor: Trajectory
    x_true: Pose
    offset_true_s: float
    config: ScenarioConfig = field(repr=False)

    def truth_text(self) -> str:
        c = self.config
        return format_kv([
            ("x_true", format_pose(self.x_true)),
            ("offset_true_s", f"{self.offset_true_s:.9f}"),
            ("sigma_t_m", f"{c.sigma_t_m:g}"),
            ("sigma_r_deg", f"{c.sigma_r_deg:g}"),
            ("seed", c.seed),
        ])

    def save(self, out_dir, sensor_lhs: bool = False) -> dict[str, Path]:
        """Write ``gt.tum``, ``sensor.tum`` and ``truth.txt``; optionally mirror the sensor to LHS."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"gt": out / "gt.tum", "sensor": out / "sensor.tum", "truth": out / "truth.txt"}
        save_tum(paths["gt"], self.gt)
        save_tum(paths["sensor"], to_lhs(self.sensor) if sensor_lhs else self.sensor)
        paths["truth"].write_text(self.truth_text())
        return paths


def read_truth(path) -> dict:
    kv = parse_kv(Path(path).read_text())
    return {
        "x_true": parse_pose(kv["x_true"]),
        "offset_true_s": float(kv["offset_true_s"]),
        "sigma_t_m": float(kv["sigma_t_m"]),
        "sigma_r_deg": float(kv["sigma_r_deg"]),
        "seed": int(kv["seed"]),
    }


def motion(stamps, cfg: ScenarioConfig, phases: np.ndarray):
    """Ground-truth ``(t, q)`` at ``stamps`` seconds since the start."""
    s = np.asarray(stamps, dtype=float)
    t = np.empty((len(s), 3))
    r = np.empty((len(s), 3))
    rot_amp = math.radians(cfg.rot_amplitude_deg)
    for k in range(3):
        w1 = 2.0 * math.pi * TRANS_FREQ_HZ[k]
        w2 = w1 * TRANS_RATIO[k]
        t[:, k] = cfg.trans_amplitude_m * (0.6 * np.sin(w1 * s + phases[k])
                                           + 0.4 * np.sin(w2 * s + phases[3 + k]))
        r[:, k] = rot_amp * np.sin(2.0 * math.pi * ROT_FREQ_HZ[k] * s + phases[6 + k])
    return t, rotvec_to_quat_arr(r)


def perturb(traj: Trajectory, seed: int, sigma_t_m: float, sigma_r_deg: float) -> Trajectory:
    """Add i.i.d. Gaussian translation noise and random-axis rotation noise (body frame)."""
    if sigma_t_m < 0 or sigma_r_deg < 0:
        raise ValueError("sigmas must be >= 0")
    if sigma_t_m == 0 and sigma_r_deg == 0:
        return traj
    rng = np.random.default_rng(seed)
    n = len(traj)
    # draw everything regardless of which sigma is zero so streams stay aligned
    dt = rng.normal(0.0, 1.0, (n, 3)) * sigma_t_m
    axes = rng.normal(0.0, 1.0, (n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    ang = rng.normal(0.0, 1.0, n) * math.radians(sigma_r_deg)
    t = traj.t + dt if sigma_t_m > 0 else traj.t
    q = quat_mul_arr(traj.q, rotvec_to_quat_arr(axes * ang[:, None])) if sigma_r_deg > 0 else traj.q
    return traj.with_poses(t, q)


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    phases = np.random.default_rng(seeds[0]).uniform(0.0, 2.0 * math.pi, 9)
    n = int(round(cfg.duration_s * cfg.rate_hz))
    rel = np.arange(n) / cfg.rate_hz
    t, q = motion(rel, cfg, phases)
    stamps = cfg.start_stamp + rel
    gt = Trajectory(stamps, t, q, frame="base", nominal_rate_hz=cfg.rate_hz)

    x = cfg.x_true
    if np.all(x.t == 0.0) and abs(x.q[3]) == 1.0:
        st, sq = t, q  # exact copy; composing would perturb the last bit
    else:
        st, sq = compose_arr(t, q, x.t, x.q)
    sensor = Trajectory(stamps + cfg.offset_true_s, st, sq, frame="sensor", nominal_rate_hz=cfg.rate_hz)
    noise_seed = int(seeds[1].generate_state(1)[0])
    sensor = perturb(sensor, noise_seed, cfg.sigma_t_m, cfg.sigma_r_deg)
    return Scenario(gt, sensor, x, cfg.offset_true_s, cfg)


def random_pose(rng: np.random.Generator, trans_scale: float = 0.1,
                angle_rad: float | None = None) -> Pose:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    ang = rng.uniform(0.0, math.pi) if angle_rad is None else angle_rad
    return Pose(rng.normal(scale=trans_scale, size=3), rotvec_to_quat(axis * ang))


def synthetic_motion_pairs(seed: int, n: int, x_true: Pose, min_deg: float = 10.0,
                           max_deg: float = 40.0, trans_scale: float = 0.2) -> list[MotionPair]:
    """Noiseless pairs ``(a, inv(X) a X)`` with rotations uniform in ``[min_deg, max_deg]`` about random axes."""
    rng = np.random.default_rng(seed)
    x_inv = inverse(x_true)
    pairs = []
    for _ in range(n):
        a = random_pose(rng, trans_scale, math.radians(rng.uniform(min_deg, max_deg)))
        b = compose(compose(x_inv, a), x_true)
        pairs.append(MotionPair(a, b, math.degrees(2.0 * math.acos(min(1.0, abs(float(a.q[3])))))))
    return pairs
