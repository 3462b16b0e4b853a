"""Hand-eye calibration, ``A X = X B``.

Convention: for a motion pair ``(a, b)`` measured over the same interval by
two rigidly coupled sensors, the unknown ``X`` satisfies
``compose(a, X) == compose(X, b)``. With relative motions taken from
trajectory ``A`` and ``B`` this means ``B_i = A_i @ X`` up to a constant
world transform, i.e. ``X`` is the pose of sensor B expressed in sensor A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMotion, NumericalFailure, TooFewPairs
from .geom import (
    Pose,
    canonical_quat_arr,
    compose_arr,
    quat_angle_arr,
    quat_conj,
    quat_mul,
    quat_mul_arr,
    quat_rotate_arr,
)
from .textio import format_kv, format_pose, parse_kv, parse_pose
from .traj import Trajectory, associate, relative_arrays, resample

METHODS = ("tsai", "daniilidis")
DEFAULT_METHOD = "daniilidis"
DEFAULT_MIN_ROT_DEG = 1.0
MAX_ANGLE_MISMATCH_DEG = 5.0
MIN_AXIS_SEPARATION_DEG = 5.0
AUTO_STRIDE_TARGET_DEG = 5.0


@dataclass(frozen=True, eq=False)
class MotionPair:
    a: Pose
    b: Pose
    rot_angle_deg: float


@dataclass(frozen=True, eq=False)
class HandEyeResult:
    x: Pose
    method: str
    residual_trans_mm: float
    residual_rot_deg: float
    pairs_used: int

    def to_text(self) -> str:
        return format_kv([
            ("method", self.method),
            ("x", format_pose(self.x)),
            ("residual_trans_mm", f"{self.residual_trans_mm:.6f}"),
            ("residual_rot_deg", f"{self.residual_rot_deg:.6f}"),
            ("pairs_used", self.pairs_used),
        ])

    @classmethod
    def from_text(cls, text: str) -> HandEyeResult:
        kv = parse_kv(text)
        return cls(parse_pose(kv["x"]), kv["method"], float(kv["residual_trans_mm"]),
                   float(kv["residual_rot_deg"]), int(kv["pairs_used"]))


def _stack(pairs):
    ta = np.array([p.a.t for p in pairs]).reshape(-1, 3)
    qa = np.array([p.a.q for p in pairs]).reshape(-1, 4)
    tb = np.array([p.b.t for p in pairs]).reshape(-1, 3)
    qb = np.array([p.b.q for p in pairs]).reshape(-1, 4)
    return ta, qa, tb, qb


def _check_observable(qa: np.ndarray) -> None:
    """Raise unless two rotation axes differ by more than the separation threshold."""
    v = qa[:, :3]
    n = np.linalg.norm(v, axis=1)
    axes = v[n > 1e-12] / n[n > 1e-12, None]
    if len(axes) < 2:
        raise DegenerateMotion("fewer than two rotations with a defined axis")
    cos_thr = math.cos(math.radians(MIN_AXIS_SEPARATION_DEG))
    # any axis far from the first settles it; otherwise check all pairs blockwise
    if np.min(np.abs(axes @ axes[0])) < cos_thr:
        return
    for start in range(0, len(axes), 512):
        if np.min(np.abs(axes[start:start + 512] @ axes.T)) < cos_thr:
            return
    raise DegenerateMotion(
        f"all {len(axes)} rotation axes are parallel within {MIN_AXIS_SEPARATION_DEG:g} deg; X is not observable"
    )


def _auto_stride(t: np.ndarray, q: np.ndarray) -> int:
    n = len(t)
    traj = Trajectory(np.arange(n, dtype=float), t, q)
    for s in range(1, max(1, n // 2) + 1):
        _, qr = relative_arrays(traj, s)
        if np.degrees(np.median(quat_angle_arr(qr))) >= AUTO_STRIDE_TARGET_DEG:
            return s
    return max(1, n // 2)


def build_motion_pairs(a: Trajectory, b: Trajectory, stride: int | None = None,
                       max_dt: float | None = None,
                       min_rot_deg: float = DEFAULT_MIN_ROT_DEG) -> list[MotionPair]:
    """Relative-motion pairs from two synchronised, same-handedness trajectories.

    The denser trajectory is interpolated onto the sparser one's associated
    stamps. ``stride=None`` picks the smallest stride whose median rotation
    reaches 5 degrees.
    """
    if a.handedness != b.handedness:
        raise ValueError("trajectories differ in handedness; convert first")
    assoc = associate(a, b, max_dt)
    pa, pb = a.sample_period() or math.inf, b.sample_period() or math.inf
    if pa >= pb:
        sparse, dense, idx = a, b, assoc.ia
    else:
        sparse, dense, idx = b, a, assoc.ib
    stamps = sparse.stamps[idx]
    inside = (stamps >= dense.stamps[0]) & (stamps <= dense.stamps[-1])
    idx, stamps = idx[inside], stamps[inside]
    s_tr = sparse.take(idx)
    d_tr = resample(dense, stamps)
    A, B = (s_tr, d_tr) if sparse is a else (d_tr, s_tr)
    if len(A) < 2:
        raise TooFewPairs(f"only {len(A)} associated samples")
    if stride is None:
        stride = _auto_stride(A.t, A.q)
    if len(A) < stride + 1:
        raise TooFewPairs(f"{len(A)} associated samples is too few for stride {stride}")

    ta, qa = relative_arrays(A, stride)
    tb, qb = relative_arrays(B, stride)
    ang_a = np.degrees(quat_angle_arr(qa))
    ang_b = np.degrees(quat_angle_arr(qb))
    keep = ((ang_a >= min_rot_deg) & (ang_b >= min_rot_deg)
            & (np.abs(ang_a - ang_b) <= MAX_ANGLE_MISMATCH_DEG))
    if np.count_nonzero(keep) < 2:
        raise TooFewPairs(
            f"{np.count_nonzero(keep)} motion pairs accepted (need >= 2) with stride {stride}, "
            f"min rotation {min_rot_deg:g} deg"
        )
    _check_observable(qa[keep])
    return [
        MotionPair(Pose(ta[i], qa[i]), Pose(tb[i], qb[i]), 0.5 * float(ang_a[i] + ang_b[i]))
        for i in np.flatnonzero(keep)
    ]


# ---------------------------------------------------------------------------
# solvers

def _skew(v: np.ndarray) -> np.ndarray:
    """Stacked cross-product matrices for ``(N, 3)`` vectors."""
    z = np.zeros(len(v))
    return np.stack([
        np.stack([z, -v[:, 2], v[:, 1]], axis=-1),
        np.stack([v[:, 2], z, -v[:, 0]], axis=-1),
        np.stack([-v[:, 1], v[:, 0], z], axis=-1),
    ], axis=1)


def _translation_lstsq(qx, ta, qa, tb) -> np.ndarray:
    # (R_a - I) t_x = R_x t_b - t_a
    eye = np.eye(3)
    # columns of R_a - I: rotated basis vectors minus the basis
    ra = np.stack([quat_rotate_arr(qa, eye[k]) - eye[k] for k in range(3)], axis=2)
    rhs = quat_rotate_arr(qx, tb) - ta
    m = ra.reshape(-1, 3)
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1e-300):
        raise DegenerateMotion("translation of X is not observable from these rotations")
    tx, *_ = np.linalg.lstsq(m, rhs.reshape(-1), rcond=None)
    return tx


def _solve_tsai(ta, qa, tb, qb) -> Pose:
    # modified Rodrigues vectors 2 sin(theta/2) n, taken with w >= 0
    pa = 2.0 * canonical_quat_arr(qa)[:, :3]
    pb = 2.0 * canonical_quat_arr(qb)[:, :3]
    m = _skew(pa + pb).reshape(-1, 3)
    rhs = (pb - pa).reshape(-1)
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise NumericalFailure("Tsai rotation system is singular (X near 180 deg or degenerate motion)")
    xp, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    px = 2.0 * xp / math.sqrt(1.0 + float(xp @ xp))
    w2 = 1.0 - 0.25 * float(px @ px)
    if not np.all(np.isfinite(px)) or w2 < 0.0:
        raise NumericalFailure("Tsai rotation solution is not a valid rotation")
    qx = np.append(0.5 * px, math.sqrt(w2))
    return Pose(_translation_lstsq(qx, ta, qa, tb), qx)


def _dual(t: np.ndarray, q: np.ndarray) -> np.ndarray:
    # dual part 0.5 * (t, 0) ⊗ q
    tq = np.concatenate([t, np.zeros((len(t), 1))], axis=1)
    return 0.5 * quat_mul_arr(tq, q)


def _solve_daniilidis(ta, qa, tb, qb) -> Pose:
    qa = canonical_quat_arr(qa)
    qb = canonical_quat_arr(qb)
    da = _dual(ta, qa)
    db = _dual(tb, qb)
    a, b = qa[:, :3], qb[:, :3]
    ad, bd = da[:, :3], db[:, :3]
    n = len(qa)
    # unknown ordering: [w, x, y, z] of the real part, then of the dual part
    s = np.zeros((n, 6, 8))
    s[:, :3, 0] = a - b
    s[:, :3, 1:4] = _skew(a + b)
    s[:, 3:, 0] = ad - bd
    s[:, 3:, 1:4] = _skew(ad + bd)
    s[:, 3:, 4] = a - b
    s[:, 3:, 5:8] = _skew(a + b)
    _, sv, vt = np.linalg.svd(s.reshape(-1, 8), full_matrices=False)
    if sv[5] <= 1e-10 * sv[0]:
        raise DegenerateMotion("dual-quaternion system has a null space larger than 2")
    v7, v8 = vt[6], vt[7]
    u1, w1 = v7[:4], v7[4:]
    u2, w2 = v8[:4], v8[4:]

    # orthogonality u·w = 0 gives a quadratic in the blend ratio
    c2, c1, c0 = u1 @ w1, u1 @ w2 + u2 @ w1, u2 @ w2
    if abs(c2) >= abs(c0):
        roots, lead = _real_roots(c2, c1, c0), True    # lambda1 = s * lambda2
    else:
        roots, lead = _real_roots(c0, c1, c2), False   # lambda2 = s * lambda1
    if not roots:
        raise NumericalFailure("Daniilidis quadratic has no real root")
    best = None
    for r in roots:
        l1, l2 = (r, 1.0) if lead else (1.0, r)
        norm2 = float((l1 * u1 + l2 * u2) @ (l1 * u1 + l2 * u2))
        if best is None or norm2 > best[0]:
            best = (norm2, l1, l2)
    norm2, l1, l2 = best
    if not norm2 > 1e-12:
        raise NumericalFailure("Daniilidis solution has vanishing rotation part")
    k = 1.0 / math.sqrt(norm2)
    real = k * (l1 * u1 + l2 * u2)
    dual = k * (l1 * w1 + l2 * w2)
    qx = np.array([real[1], real[2], real[3], real[0]])
    qd = np.array([dual[1], dual[2], dual[3], dual[0]])
    tx = 2.0 * quat_mul(qd, quat_conj(qx))[:3]
    if not (np.all(np.isfinite(tx)) and np.all(np.isfinite(qx))):
        raise NumericalFailure("Daniilidis produced non-finite output")
    return Pose(tx, qx)


def _real_roots(a: float, b: float, c: float) -> list[float]:
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    a, b, c = a / scale, b / scale, c / scale
    if abs(a) < 1e-14:
        return [-c / b] if abs(b) > 1e-14 else []
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if disc < -1e-9:
            return []
        disc = 0.0
    sq = math.sqrt(disc)
    # numerically stable pair of roots
    qv = -0.5 * (b + math.copysign(sq, b))
    roots = [qv / a]
    if qv != 0.0:
        roots.append(c / qv)
    return roots


_SOLVERS = {"tsai": _solve_tsai, "daniilidis": _solve_daniilidis}


def solve_hand_eye(pairs, method: str = DEFAULT_METHOD) -> HandEyeResult:
    if method not in _SOLVERS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    pairs = list(pairs)
    if len(pairs) < 2:
        raise TooFewPairs(f"{len(pairs)} motion pairs given (need >= 2)")
    ta, qa, tb, qb = _stack(pairs)
    _check_observable(qa)
    x = _SOLVERS[method](ta, qa, tb, qb)
    trans_mm, rot_deg = residual(x, pairs)
    return HandEyeResult(x, method, trans_mm, rot_deg, len(pairs))


def residual(x: Pose, pairs) -> tuple[float, float]:
    """Mean translational (mm) and rotational (deg) disagreement of ``a X`` and ``X b``."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("residual needs at least one pair")
    ta, qa, tb, qb = _stack(pairs)
    t1, q1 = compose_arr(ta, qa, x.t, x.q)
    t2, q2 = compose_arr(x.t, x.q, tb, qb)
    trans = np.linalg.norm(t1 - t2, axis=1) * 1e3
    rel = quat_mul_arr(np.concatenate([-q1[:, :3], q1[:, 3:]], axis=1), q2)
    rot = np.degrees(quat_angle_arr(rel))
    return math.fsum(trans) / len(pairs), math.fsum(rot) / len(pairs)


def pose_error(x: Pose, truth: Pose) -> tuple[float, float]:
    """Translation error (m) and rotation error (rad) between two transforms."""
    rel = quat_mul(quat_conj(truth.q), x.q)
    ang = 2.0 * math.atan2(float(np.linalg.norm(rel[:3])), abs(float(rel[3])))
    return float(np.linalg.norm(x.t - truth.t)), ang
