"""Flat ``key=value`` text blocks used for configs, reports and sidecars."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .geom import Pose, canonical_quat


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def format_kv(items) -> str:
    return "".join(f"{k}={v}\n" for k, v in items)


def read_kv(path) -> dict[str, str]:
    return parse_kv(Path(path).read_text())


def format_pose(p: Pose) -> str:
    """The 7 TUM pose fields, space separated, quaternion with ``w >= 0``."""
    values = np.concatenate([p.t, canonical_quat(p.q)]) + 0.0
    return " ".join(f"{v:.15g}" for v in values)


def parse_pose(text: str) -> Pose:
    fields = text.replace(",", " ").split()
    if len(fields) != 7:
        raise ValueError(f"expected 7 pose fields (x y z qx qy qz qw), got {len(fields)}")
    return Pose.from_array([float(f) for f in fields])
