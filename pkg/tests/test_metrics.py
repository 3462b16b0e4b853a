import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pose
from trajcal.errors import DegenerateGeometry, EmptyAssociation
from trajcal.geom import IDENTITY, quat_to_matrix
from trajcal.metrics import ApeReport, ape, emit_report, error_statistics, parse_csv, umeyama_align
from trajcal.traj import Trajectory, map_poses


def walk(rng, n=100, rate=30.0):
    t = np.cumsum(rng.normal(scale=0.02, size=(n, 3)), axis=0)
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return Trajectory(10.0 + np.arange(n) / rate, t, q, nominal_rate_hz=rate)


def test_umeyama_identity_and_rigid_copy(rng):
    pts = rng.normal(size=(50, 3))
    assert umeyama_align(pts, pts).allclose(IDENTITY, 1e-12)
    g = random_pose(rng)
    moved = pts @ quat_to_matrix(g.q).T + g.t
    a = umeyama_align(moved, pts)
    back = moved @ quat_to_matrix(a.q).T + a.t
    assert np.max(np.abs(back - pts)) <= 1e-9


def test_umeyama_matches_scipy(rng):
    from scipy.spatial.transform import Rotation

    src = rng.normal(size=(30, 3))
    dst = src @ quat_to_matrix(random_pose(rng).q).T + rng.normal(scale=0.05, size=(30, 3))
    a = umeyama_align(src, dst)
    r, _ = Rotation.align_vectors(dst - dst.mean(0), src - src.mean(0))
    np.testing.assert_allclose(quat_to_matrix(a.q), r.as_matrix(), atol=1e-10)


def test_umeyama_never_reflects(rng):
    src = rng.normal(size=(20, 3))
    dst = src * [1, 1, -1]
    r = quat_to_matrix(umeyama_align(src, dst).q)
    assert np.linalg.det(r) == pytest.approx(1.0)


def test_umeyama_degenerate():
    with pytest.raises(DegenerateGeometry):
        umeyama_align(np.zeros((2, 3)), np.zeros((2, 3)))
    line = np.outer(np.arange(10.0), [1, 2, 3])
    with pytest.raises(DegenerateGeometry):
        umeyama_align(line, line)


def test_ape_identical(rng):
    tr = walk(rng)
    for align in (False, True):
        rep = ape(tr, tr, align=align)
        assert max(rep.rmse, rep.mean, rep.max, rep.std, rep.median) <= 1e-12


def test_ape_345(rng):
    tr = walk(rng)
    shifted = tr.with_poses(tr.t + [0.003, 0.004, 0.0], tr.q)
    rep = ape(shifted, tr, align=False)
    assert np.all(np.abs(rep.errors - 0.005) <= 1e-15)
    assert rep.rmse == pytest.approx(0.005, abs=1e-15)


def test_ape_association(rng):
    tr = walk(rng)
    est = tr.take(slice(10, 60))
    rep = ape(est, tr, align=False)
    assert len(rep.errors) == 50
    np.testing.assert_array_equal(rep.stamps, tr.stamps[10:60])
    far = Trajectory(tr.stamps + 1000, tr.t, tr.q)
    with pytest.raises(EmptyAssociation):
        ape(far, tr)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=100))
def test_statistics_identity(errors):
    rmse, mean, median, std, lo, hi = error_statistics(errors)
    assert math.isclose(rmse * rmse, mean * mean + std * std, rel_tol=1e-9, abs_tol=1e-300)
    assert lo <= median <= hi
    # fsum(e)/n rounds twice, so the mean may sit one ulp outside [lo, hi]
    assert math.nextafter(lo, -math.inf) <= mean <= math.nextafter(hi, math.inf)


def test_statistics_empty():
    assert all(math.isnan(v) for v in error_statistics([]))


@pytest.mark.parametrize("mean, std, rmse", [(2.85, 1.46, 3.19), (2.69, 1.44, 3.05)])
def test_rmse_from_reported_mean_std(mean, std, rmse):
    assert abs(math.sqrt(mean * mean + std * std) - rmse) <= 0.02


def test_alignment_invariance(rng):
    gt = walk(rng)
    est = gt.with_poses(gt.t + rng.normal(scale=0.003, size=gt.t.shape), gt.q)
    base = ape(est, gt).rmse
    for _ in range(20):
        moved = map_poses(est, left=random_pose(rng, 5.0))
        assert abs(ape(moved, gt).rmse - base) <= 1e-9


def test_emit_csv(rng):
    empty = ApeReport.from_errors([], [])
    assert emit_report(empty, "csv") == b"stamp,error_m\n"
    rep = ApeReport.from_errors([1.0, 2.0, 3.0], [0.1, 0.2, 0.3])
    data = emit_report(rep, "csv")
    assert len(data.decode().splitlines()) == 4
    s, e = parse_csv(data)
    np.testing.assert_array_equal(e, rep.errors)
    np.testing.assert_array_equal(s, rep.stamps)


def test_emit_json_and_svg(rng):
    tr = walk(rng)
    rep = ape(tr.with_poses(tr.t + 0.001, tr.q), tr)
    doc = json.loads(emit_report(rep, "json"))
    assert doc["count"] == 100 and doc["aligned"] is True
    assert doc["rmse"] == rep.rmse and len(doc["alignment"]) == 7
    root = ET.fromstring(emit_report(rep, "svg"))
    assert root.tag.endswith("svg")
    assert any(el.tag.endswith("polyline") for el in root.iter())
    ET.fromstring(emit_report(ApeReport.from_errors([], []), "svg"))
    with pytest.raises(ValueError):
        emit_report(rep, "pdf")
