"""Clock-offset estimation from matched axial position peaks."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import InsufficientOverlap, NoMatches, NoPeaks
from .traj import Trajectory

DEFAULT_PROMINENCE_M = 0.010
DEFAULT_MIN_SEPARATION_S = 0.5
DEFAULT_MATCH_WINDOW_S = 0.5
DEFAULT_AXES = "xyz"

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


class Peak(NamedTuple):
    stamp: float
    value: float
    polarity: str  # "max" or "min"
    prominence: float


@dataclass(frozen=True)
class PeakList:
    axis: str
    peaks: list[Peak]

    def stamps(self, polarity: str | None = None) -> np.ndarray:
        return np.array([p.stamp for p in self.peaks if polarity in (None, p.polarity)])

    def __len__(self) -> int:
        return len(self.peaks)


@dataclass(frozen=True)
class OffsetReport:
    """``offset_s`` is the mean of ``stamp_b - stamp_a`` over matched peaks."""

    offset_s: float
    per_peak_diffs: list[float] = field(repr=False)
    matched_count: int
    spread_s: float

    def to_text(self) -> str:
        return (f"offset_s={self.offset_s:.9f}\n"
                f"matched_count={self.matched_count}\n"
                f"spread_s={self.spread_s:.9f}\n")


def _thin(idx: np.ndarray, prom: np.ndarray, stamps: np.ndarray, min_sep: float) -> list[int]:
    # most prominent first; ties resolved by earlier sample
    order = sorted(range(len(idx)), key=lambda k: (-prom[k], idx[k]))
    kept_stamps: list[float] = []
    kept: list[int] = []
    for k in order:
        s = stamps[idx[k]]
        pos = bisect.bisect_left(kept_stamps, s)
        if pos > 0 and s - kept_stamps[pos - 1] < min_sep:
            continue
        if pos < len(kept_stamps) and kept_stamps[pos] - s < min_sep:
            continue
        kept_stamps.insert(pos, s)
        kept.insert(pos, k)
    return kept


def detect_peaks(traj: Trajectory, axis: str, prominence_m: float = DEFAULT_PROMINENCE_M,
                 min_separation_s: float = DEFAULT_MIN_SEPARATION_S) -> PeakList:
    """Local maxima and minima of one position axis with prominence >= ``prominence_m``.

    Same-polarity peaks closer than ``min_separation_s`` are thinned, keeping
    the more prominent one. Peaks sit on sample stamps (no sub-sample fit).
    """
    if len(traj) == 0:
        raise NoPeaks("empty trajectory")
    if prominence_m <= 0:
        raise ValueError("prominence must be positive")
    values = np.asarray(traj.t[:, _AXIS_INDEX[axis]])
    peaks = []
    for polarity, sign in (("max", 1.0), ("min", -1.0)):
        idx, prom = _kernels.local_maxima(sign * values)
        sel = prom >= prominence_m
        idx, prom = idx[sel], prom[sel]
        for k in _thin(idx, prom, traj.stamps, min_separation_s):
            i = idx[k]
            peaks.append(Peak(float(traj.stamps[i]), float(values[i]), polarity, float(prom[k])))
    if not peaks:
        raise NoPeaks(f"no {axis}-axis peaks with prominence >= {prominence_m * 1e3:.1f} mm")
    peaks.sort(key=lambda p: p.stamp)
    return PeakList(axis, peaks)


def estimate_offset(a: Trajectory, b: Trajectory, axes=DEFAULT_AXES,
                    prominence_m: float = DEFAULT_PROMINENCE_M,
                    match_window_s: float = DEFAULT_MATCH_WINDOW_S,
                    min_separation_s: float = DEFAULT_MIN_SEPARATION_S) -> OffsetReport:
    """Estimate the constant clock offset of ``b`` relative to ``a``.

    Peaks of the same axis and polarity are paired as mutual nearest
    neighbours within ``match_window_s``; the offset is the mean stamp
    difference over all pairs pooled across axes.
    """
    if len(a) == 0 or len(b) == 0:
        raise InsufficientOverlap("empty trajectory")
    if (a.stamps[0] > b.stamps[-1] + match_window_s
            or b.stamps[0] > a.stamps[-1] + match_window_s):
        raise InsufficientOverlap(
            f"time spans [{a.stamps[0]:.3f}, {a.stamps[-1]:.3f}] and "
            f"[{b.stamps[0]:.3f}, {b.stamps[-1]:.3f}] do not overlap"
        )
    diffs: list[float] = []
    for axis in axes:
        try:
            pa = detect_peaks(a, axis, prominence_m, min_separation_s)
            pb = detect_peaks(b, axis, prominence_m, min_separation_s)
        except NoPeaks:
            continue
        for polarity in ("max", "min"):
            sa = pa.stamps(polarity)
            sb = pb.stamps(polarity)
            ia, ib = _kernels.associate_nearest(sa, sb, match_window_s)
            # stamp order within an axis/polarity; axes pooled in the given order
            diffs.extend((sb[ib] - sa[ia]).tolist())
    if not diffs:
        raise NoMatches(f"no peak pairs within {match_window_s * 1e3:.0f} ms on axes {''.join(axes)}")
    d = np.array(diffs)
    mean = math.fsum(diffs) / len(diffs)
    spread = math.sqrt(math.fsum((d - mean) ** 2) / len(diffs))
    return OffsetReport(mean, diffs, len(diffs), spread)


def apply_offset(traj: Trajectory, dt: float) -> Trajectory:
    """Shift every stamp by ``dt`` seconds."""
    if dt == 0.0:
        return traj
    return replace(traj, stamps=traj.stamps + dt)
