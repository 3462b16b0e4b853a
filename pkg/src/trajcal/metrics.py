"""Rigid alignment and translational Absolute Pose Error."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .errors import DegenerateGeometry
from .geom import Pose, matrix_to_quat, quat_rotate_arr
from .traj import Trajectory, associate

FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True, eq=False)
class ApeReport:
    stamps: np.ndarray
    errors: np.ndarray
    rmse: float
    mean: float
    median: float
    std: float
    min: float
    max: float
    aligned: bool
    alignment: Pose | None = None

    @classmethod
    def from_errors(cls, stamps, errors, aligned: bool = False,
                    alignment: Pose | None = None) -> ApeReport:
        stamps = np.asarray(stamps, dtype=float).reshape(-1)
        errors = np.asarray(errors, dtype=float).reshape(-1)
        return cls(stamps, errors, *error_statistics(errors), aligned, alignment)

    def summary(self) -> str:
        return (f"APE ({'aligned' if self.aligned else 'unaligned'}, n={len(self.errors)}) [m]: "
                f"rmse={self.rmse:.6g} mean={self.mean:.6g} median={self.median:.6g} "
                f"std={self.std:.6g} min={self.min:.6g} max={self.max:.6g}")

    def to_dict(self) -> dict:
        return {
            "rmse": self.rmse, "mean": self.mean, "median": self.median,
            "std": self.std, "min": self.min, "max": self.max,
            "aligned": self.aligned,
            "alignment": None if self.alignment is None else self.alignment.to_array().tolist(),
            "count": len(self.errors),
            "errors": [[float(s), float(e)] for s, e in zip(self.stamps, self.errors)],
        }


def error_statistics(errors) -> tuple[float, float, float, float, float, float]:
    """``(rmse, mean, median, std, min, max)`` with population std.

    Sums use :func:`math.fsum`, so results do not depend on summation order.
    """
    e = [float(v) for v in errors]
    n = len(e)
    if n == 0:
        nan = float("nan")
        return nan, nan, nan, nan, nan, nan
    mean = math.fsum(e) / n
    rmse = math.sqrt(math.fsum(v * v for v in e) / n)
    std = math.sqrt(math.fsum((v - mean) * (v - mean) for v in e) / n)
    return rmse, mean, statistics.median(e), std, min(e), max(e)


def umeyama_align(est_positions, gt_positions) -> Pose:
    """Rigid transform (no scale) taking ``est_positions`` onto ``gt_positions`` in least squares."""
    src = np.asarray(est_positions, dtype=float).reshape(-1, 3)
    dst = np.asarray(gt_positions, dtype=float).reshape(-1, 3)
    if len(src) != len(dst):
        raise ValueError("position sets differ in length")
    if len(src) < 3:
        raise DegenerateGeometry(f"need at least 3 points to align, got {len(src)}")
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    cov = (dst - mu_d).T @ (src - mu_s) / len(src)
    u, s, vt = np.linalg.svd(cov)
    if s[0] == 0.0 or s[1] <= 1e-10 * s[0]:
        raise DegenerateGeometry("points are collinear or coincident; rotation is not determined")
    d = np.ones(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        d[2] = -1.0
    r = (u * d) @ vt
    return Pose(mu_d - r @ mu_s, matrix_to_quat(r))


def ape(est: Trajectory, gt: Trajectory, align: bool = True,
        max_dt: float | None = None) -> ApeReport:
    """Translational APE of ``est`` against ``gt`` over timestamp-associated samples."""
    assoc = associate(est, gt, max_dt)
    pe = est.t[assoc.ia]
    pg = gt.t[assoc.ib]
    alignment = None
    if align:
        alignment = umeyama_align(pe, pg)
        pe = quat_rotate_arr(alignment.q, pe) + alignment.t
    d = pg - pe
    errors = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])
    return ApeReport.from_errors(gt.stamps[assoc.ib], errors, align, alignment)


# ---------------------------------------------------------------------------
# rendering

def emit_report(report: ApeReport, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        lines = ["stamp,error_m"]
        lines += [f"{s:.9f},{e!r}" for s, e in zip(report.stamps.tolist(), report.errors.tolist())]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=2, allow_nan=True) + "\n").encode()
    if fmt == "svg":
        return _svg(report).encode()
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def parse_csv(data: bytes | str) -> tuple[np.ndarray, np.ndarray]:
    text = data.decode() if isinstance(data, bytes) else data
    lines = text.strip().splitlines()
    if not lines or lines[0] != "stamp,error_m":
        raise ValueError("missing 'stamp,error_m' header")
    rows = [tuple(float(v) for v in line.split(",")) for line in lines[1:]]
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def _svg(report: ApeReport, width: int = 800, height: int = 400) -> str:
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    x = report.stamps - report.stamps[0] if len(report.stamps) else report.stamps
    y = report.errors * 1e3
    xmax = float(x.max()) if len(x) and x.max() > 0 else 1.0
    ymax = float(y.max()) * 1.1 if len(y) and y.max() > 0 else 1.0

    def px(v):
        return ml + pw * v / xmax

    def py(v):
        return mt + ph * (1.0 - v / ymax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for k in range(6):
        xv, yv = xmax * k / 5, ymax * k / 5
        out.append(f'<text x="{px(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{ml - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">time since first stamp [s]</text>')
    out.append(f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2})">APE [mm]</text>')
    if len(x):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x.tolist(), y.tolist()))
        out.append(f'<polyline fill="none" stroke="#1f77b4" stroke-width="1" points="{pts}"/>')
        for name, val, color in (("rmse", report.rmse, "#d62728"), ("mean", report.mean, "#2ca02c")):
            yy = py(val * 1e3)
            out.append(f'<line x1="{ml}" y1="{yy:.2f}" x2="{ml + pw}" y2="{yy:.2f}" '
                       f'stroke="{color}" stroke-dasharray="6,4"/>')
    label = "aligned" if report.aligned else "unaligned"
    title = (f"APE ({label}) rmse={report.rmse * 1e3:.3f} mm  mean={report.mean * 1e3:.3f} mm  "
             f"max={report.max * 1e3:.3f} mm")
    out.append(f'<text x="{ml}" y="{mt - 14}">{escape(title)}</text>')
    out.append("</svg>\n")
    return "\n".join(out)
