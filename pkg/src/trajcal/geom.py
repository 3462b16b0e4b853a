"""Rigid-body pose algebra.

Conventions used throughout the package:

* Quaternions are stored as ``(x, y, z, w)`` arrays, Hamilton product,
  active rotations.
* A :class:`Pose` maps points of its child frame into its parent frame,
  ``p_parent = R(q) @ p_child + t``.
* ``compose(a, b)`` is the matrix product ``A @ B``: apply ``b`` first,
  then ``a``.

Scalar functions operate on single poses. The ``*_arr`` helpers are the
vectorised counterparts over ``(N, 3)`` / ``(N, 4)`` arrays and follow the
same conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Renormalisation threshold on |‖q‖ - 1|. Tight enough that normalised
# quaternions are left bit-identical, loose enough to absorb float drift.
_NORM_TOL = 1e-12
# Below this arc the slerp weights lose precision; fall back to nlerp.
_SLERP_EPS = 1e-8


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Pose:
    """Immutable rigid transform: translation ``t`` (m) and unit quaternion ``q`` (xyzw)."""

    t: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float).reshape(3)
        q = np.array(self.q, dtype=float).reshape(4)
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(q))):
            raise ValueError("pose components must be finite")
        n = math.sqrt(float(q @ q))
        if n < 1e-12:
            raise ValueError("zero quaternion")
        if abs(n - 1.0) > _NORM_TOL:
            q = q / n
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "q", _readonly(q))

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.zeros(3), np.array([0.0, 0.0, 0.0, 1.0]))

    @classmethod
    def from_array(cls, values) -> Pose:
        """Build from the 7 TUM pose fields ``x y z qx qy qz qw``."""
        v = np.asarray(values, dtype=float).reshape(7)
        return cls(v[:3], v[3:])

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.t, self.q])

    @classmethod
    def from_matrix(cls, m) -> Pose:
        m = np.asarray(m, dtype=float)
        return cls(m[:3, 3], matrix_to_quat(m[:3, :3]))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = quat_to_matrix(self.q)
        m[:3, 3] = self.t
        return m

    def allclose(self, other: Pose, atol: float = 1e-9) -> bool:
        """Compare as rigid transforms (quaternion sign ignored)."""
        if not np.allclose(self.t, other.t, rtol=0.0, atol=atol):
            return False
        return bool(np.allclose(self.q, other.q, rtol=0.0, atol=atol)
                    or np.allclose(self.q, -other.q, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        t = ", ".join(f"{v:.6g}" for v in self.t)
        q = ", ".join(f"{v:.6g}" for v in self.q)
        return f"Pose(t=[{t}], q=[{q}])"


IDENTITY = Pose.identity()


# ---------------------------------------------------------------------------
# quaternion primitives (scalar)

def quat_mul(q1, q2) -> np.ndarray:
    x1, y1, z1, w1 = q1
    x2, y2, z2, w2 = q2
    return np.array([
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
    ])


def quat_conj(q) -> np.ndarray:
    x, y, z, w = q
    return np.array([-x, -y, -z, w])


def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = math.sqrt(float(q @ q))
    if n < 1e-12:
        raise ValueError("zero quaternion")
    return q / n


def quat_rotate(q, v) -> np.ndarray:
    """Rotate vector ``v`` by unit quaternion ``q``."""
    u = np.asarray(q[:3], dtype=float)
    w = float(q[3])
    v = np.asarray(v, dtype=float)
    uv = np.cross(u, v)
    return v + 2.0 * (w * uv + np.cross(u, uv))


def canonical_quat(q) -> np.ndarray:
    """Fix the double-cover sign: ``w >= 0``; for ``w == 0`` the first nonzero of x, y, z is positive."""
    q = np.array(q, dtype=float)
    if q[3] < 0.0:
        return -q
    if q[3] == 0.0:
        for c in q[:3]:
            if c != 0.0:
                return -q if c < 0.0 else q
    return q


def quat_to_matrix(q) -> np.ndarray:
    x, y, z, w = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(r) -> np.ndarray:
    # Shepperd's method: branch on the largest diagonal term for stability.
    r = np.asarray(r, dtype=float)
    tr = r[0, 0] + r[1, 1] + r[2, 2]
    if tr > 0:
        s = 2.0 * math.sqrt(tr + 1.0)
        q = [(r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s, 0.25 * s]
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = 2.0 * math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2])
        q = [0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s, (r[2, 1] - r[1, 2]) / s]
    elif r[1, 1] > r[2, 2]:
        s = 2.0 * math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2])
        q = [(r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s, (r[0, 2] - r[2, 0]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1])
        q = [(r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s, (r[1, 0] - r[0, 1]) / s]
    return canonical_quat(quat_normalize(q))


def quat_angle(q) -> float:
    """Rotation angle of ``q`` in radians, in [0, pi]."""
    v = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2])
    return 2.0 * math.atan2(v, abs(q[3]))


def rotation_angle_deg(q0, q1) -> float:
    """Geodesic angle between two rotations, degrees in [0, 180]."""
    return math.degrees(quat_angle(quat_mul(quat_conj(q0), q1)))


# ---------------------------------------------------------------------------
# rotation vectors

def rotvec_to_quat(r) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(3)
    theta = math.sqrt(float(r @ r))
    half = 0.5 * theta
    # sin(theta/2)/theta with a series near zero
    k = math.sin(half) / theta if theta > 1e-6 else 0.5 - theta * theta / 48.0
    return np.array([r[0] * k, r[1] * k, r[2] * k, math.cos(half)])


def quat_to_rotvec(q) -> np.ndarray:
    """Axis-angle vector with magnitude in [0, pi]."""
    q = np.asarray(q, dtype=float)
    if q[3] < 0.0:
        q = -q
    v = q[:3]
    s = math.sqrt(float(v @ v))
    if s < 1e-12:
        return 2.0 * v / q[3]
    return v * (2.0 * math.atan2(s, q[3]) / s)


# ---------------------------------------------------------------------------
# pose operations

def compose(a: Pose, b: Pose) -> Pose:
    """``a @ b``: apply ``b``, then ``a``."""
    q = quat_mul(a.q, b.q)
    return Pose(a.t + quat_rotate(a.q, b.t), q / math.sqrt(float(q @ q)))


def inverse(a: Pose) -> Pose:
    qi = quat_conj(a.q)
    return Pose(-quat_rotate(qi, a.t), qi)


def slerp(q0, q1, u: float) -> np.ndarray:
    """Shortest-arc spherical interpolation, ``u`` in [0, 1]."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if float(q0 @ q1) < 0.0:
        q1 = -q1
    # arc between the 4-vectors (half the rotation angle), well conditioned
    phi = 2.0 * math.atan2(np.linalg.norm(q0 - q1), np.linalg.norm(q0 + q1))
    if phi < _SLERP_EPS:
        q = (1.0 - u) * q0 + u * q1
    else:
        s = math.sin(phi)
        q = (math.sin((1.0 - u) * phi) / s) * q0 + (math.sin(u * phi) / s) * q1
    return q / math.sqrt(float(q @ q))


def interpolate_pose(p0: Pose, p1: Pose, u: float) -> Pose:
    """Linear translation, slerp rotation."""
    if u == 0.0:
        return p0
    if u == 1.0:
        return p1
    return Pose((1.0 - u) * p0.t + u * p1.t, slerp(p0.q, p1.q, u))


def lhs_to_rhs(p: Pose) -> Pose:
    """Mirror a left-handed (Unity-style, Y flipped) pose into a right-handed frame.

    Negates ``y``, ``q_y`` and ``q_w``. Negating ``q_x, q_z`` instead gives
    the same rotation; the two differ only by quaternion sign.
    """
    t = p.t.copy()
    q = p.q.copy()
    t[1] = -t[1]
    q[1] = -q[1]
    q[3] = -q[3]
    return Pose(t, q)


# ---------------------------------------------------------------------------
# vectorised helpers over (N, 4) quaternions and (N, 3) translations

def quat_mul_arr(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    x1, y1, z1, w1 = np.moveaxis(np.asarray(q1, dtype=float), -1, 0)
    x2, y2, z2, w2 = np.moveaxis(np.asarray(q2, dtype=float), -1, 0)
    return np.stack([
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
    ], axis=-1)


def quat_conj_arr(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=float)
    out[..., :3] *= -1.0
    return out


def quat_rotate_arr(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    u = q[..., :3]
    w = q[..., 3:4]
    uv = np.cross(u, v)
    return v + 2.0 * (w * uv + np.cross(u, uv))


def normalize_arr(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def compose_arr(ta, qa, tb, qb):
    """Vectorised :func:`compose`; arguments broadcast against each other."""
    q = normalize_arr(quat_mul_arr(qa, qb))
    t = np.asarray(ta, dtype=float) + quat_rotate_arr(qa, tb)
    return t, q


def inverse_arr(t, q):
    qi = quat_conj_arr(q)
    return -quat_rotate_arr(qi, t), qi


def quat_angle_arr(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return 2.0 * np.arctan2(np.linalg.norm(q[..., :3], axis=-1), np.abs(q[..., 3]))


def canonical_quat_arr(q: np.ndarray) -> np.ndarray:
    q = np.array(q, dtype=float)
    flip = q[..., 3] < 0.0
    zero_w = q[..., 3] == 0.0
    if np.any(zero_w):
        for i in np.flatnonzero(zero_w):
            q[i] = canonical_quat(q[i])
    q[flip] *= -1.0
    return q


def rotvec_to_quat_arr(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(-1, 3)
    theta = np.linalg.norm(r, axis=1)
    safe = np.where(theta > 1e-6, theta, 1.0)
    k = np.where(theta > 1e-6, np.sin(0.5 * theta) / safe, 0.5 - theta * theta / 48.0)
    return np.concatenate([r * k[:, None], np.cos(0.5 * theta)[:, None]], axis=1)
