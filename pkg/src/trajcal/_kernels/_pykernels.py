"""numpy/scipy implementations of the hot kernels.

Used when the compiled extension is unavailable, or forced with
``TRAJCAL_PURE_PYTHON=1``. Semantics must match ``_ckernels.pyx`` exactly.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import find_peaks


def _nearest(src: np.ndarray, ref: np.ndarray) -> np.ndarray:
    # index into ref of the nearest stamp for every src stamp; ties -> lower index
    j = np.searchsorted(ref, src, side="left")
    j = np.clip(j, 1, len(ref) - 1) if len(ref) > 1 else np.zeros(len(src), dtype=np.intp)
    if len(ref) == 1:
        return j
    left = src - ref[j - 1]
    right = ref[j] - src
    return np.where(left <= right, j - 1, j)


def associate_nearest(ta, tb, max_dt: float):
    """Mutual-nearest-neighbour pairing of two sorted stamp vectors.

    Returns ``(ia, ib)`` index arrays, increasing, with ``|ta[ia] - tb[ib]| <= max_dt``.
    """
    ta = np.ascontiguousarray(ta, dtype=np.float64)
    tb = np.ascontiguousarray(tb, dtype=np.float64)
    if len(ta) == 0 or len(tb) == 0:
        empty = np.zeros(0, dtype=np.intp)
        return empty, empty.copy()
    nb = _nearest(ta, tb)
    na = _nearest(tb, ta)
    ia = np.arange(len(ta))
    keep = (na[nb] == ia) & (np.abs(tb[nb] - ta) <= max_dt)
    return ia[keep].astype(np.intp), nb[keep].astype(np.intp)


def local_maxima(x):
    """Local maxima (plateau midpoints, borders excluded) and their topographic prominence."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if len(x) < 3:
        return np.zeros(0, dtype=np.intp), np.zeros(0)
    peaks, props = find_peaks(x, prominence=(None, None))
    return peaks.astype(np.intp), props["prominences"].astype(np.float64)


def resample_poses(stamps, t, q, query):
    """Interpolate a pose sequence at ``query`` stamps (lerp + slerp).

    Query stamps must lie inside ``[stamps[0], stamps[-1]]``; the caller checks.
    Exact stamp hits return the stored sample unchanged.
    """
    stamps = np.ascontiguousarray(stamps, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    query = np.ascontiguousarray(query, dtype=np.float64)
    n = len(stamps)
    if n == 1:
        idx = np.zeros(len(query), dtype=np.intp)
        return t[idx].copy(), q[idx].copy()
    i = np.clip(np.searchsorted(stamps, query, side="right") - 1, 0, n - 2)
    s0 = stamps[i]
    s1 = stamps[i + 1]
    u = (query - s0) / (s1 - s0)
    t0, t1 = t[i], t[i + 1]
    q0, q1 = q[i], q[i + 1].copy()
    flip = np.einsum("ij,ij->i", q0, q1) < 0.0
    q1[flip] *= -1.0
    phi = 2.0 * np.arctan2(np.linalg.norm(q0 - q1, axis=1), np.linalg.norm(q0 + q1, axis=1))
    small = phi < 1e-8
    sphi = np.where(small, 1.0, np.sin(phi))
    w0 = np.where(small, 1.0 - u, np.sin((1.0 - u) * phi) / sphi)
    w1 = np.where(small, u, np.sin(u * phi) / sphi)
    qo = w0[:, None] * q0 + w1[:, None] * q1
    qo /= np.sqrt(np.einsum("ij,ij->i", qo, qo))[:, None]
    to = (1.0 - u)[:, None] * t0 + u[:, None] * t1

    at0 = query == s0
    at1 = query == s1
    to[at0], qo[at0] = t0[at0], q[i][at0]
    to[at1], qo[at1] = t1[at1], q[i + 1][at1]
    return to, qo
