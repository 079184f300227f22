import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from branchangle.angles import (AnchorQuality, AnglePolicy, BranchAngle,
                                compute_angle_map, render_angle_overlay,
                                select_anchors, vector_angle)
from branchangle.keypoints import (KeyPoint, NodeType, VesselGraph, WalkerParams,
                                   detect_keypoints)
from conftest import thin_y_skeleton


def test_vector_angle_right_angle():
    assert vector_angle((0, 0), (1, 0), (0, 1)) == pytest.approx(90.0)


def test_vector_angle_collinear_and_opposite():
    assert vector_angle((0, 0), (5, 0), (9, 0)) == pytest.approx(0.0)
    assert vector_angle((0, 0), (-3, 0), (7, 0)) == pytest.approx(180.0)


def test_vector_angle_45():
    assert vector_angle((2, 2), (5, 2), (5, 5)) == pytest.approx(45.0)


def test_vector_angle_zero_vector():
    with pytest.raises(ValueError):
        vector_angle((1, 1), (1, 1), (2, 2))


coord = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@given(st.tuples(coord, coord), st.tuples(coord, coord), st.tuples(coord, coord))
def test_vector_angle_symmetry_and_range(p, a, c):
    if a == p or c == p:
        return
    t1 = vector_angle(p, a, c)
    t2 = vector_angle(p, c, a)
    assert t1 == pytest.approx(t2)
    assert 0.0 <= t1 <= 180.0


@given(st.tuples(coord, coord), st.tuples(coord, coord),
       st.floats(min_value=0.1, max_value=50.0))
def test_vector_angle_scale_invariance(a, c, scale):
    p = (0.0, 0.0)
    if a == p or c == p:
        return
    t1 = vector_angle(p, a, c)
    t2 = vector_angle(p, (a[0] * scale, a[1] * scale), (c[0] * scale, c[1] * scale))
    # acos amplifies rounding near 0/180 degrees; a loose absolute bound
    # still catches any real scale dependence
    assert t1 == pytest.approx(t2, abs=1e-4)


def test_branch_angle_validates_on_construction():
    theta = vector_angle((5, 5), (9, 5), (5, 9))
    BranchAngle(bifurcation=(5, 5), anchor_a=(9, 5), anchor_c=(5, 9),
                theta_deg=theta)
    with pytest.raises(ValueError):
        BranchAngle(bifurcation=(5, 5), anchor_a=(9, 5), anchor_c=(5, 9),
                    theta_deg=theta + 0.5)
    with pytest.raises(ValueError):
        BranchAngle(bifurcation=(5, 5), anchor_a=(5, 5), anchor_c=(5, 9),
                    theta_deg=0.0)


def _hand_graph():
    """Bifurcation at (10, 10) with prune anchors east and south and an
    endpoint anchor northwest."""
    nodes = [
        KeyPoint(index=0, position=(10, 2), node_type=NodeType.ROOT, step=0,
                 parent_index=None),
        KeyPoint(index=1, position=(10, 10), node_type=NodeType.BIFURCATION,
                 step=8, parent_index=0),
        KeyPoint(index=2, position=(18, 10), node_type=NodeType.PRUNE, step=8,
                 parent_index=1),
        KeyPoint(index=3, position=(10, 18), node_type=NodeType.PRUNE, step=8,
                 parent_index=1),
        KeyPoint(index=4, position=(6, 6), node_type=NodeType.ENDPOINT, step=5,
                 parent_index=1),
    ]
    nodes[0].children_indices.append(1)
    nodes[1].children_indices.extend([2, 3, 4])
    return VesselGraph(nodes=nodes, source_dims=(25, 25))


def test_select_anchors_pairs_and_quality():
    g = _hand_graph()
    pairs = select_anchors(g, 1)
    assert len(pairs) == 3
    qualities = sorted(q.value for _, _, q in pairs)
    assert qualities == ["mixed", "mixed", "prune_pair"]
    with pytest.raises(ValueError):
        select_anchors(g, 2)


def test_compute_angle_map_prune_preferred():
    g = _hand_graph()
    angles = compute_angle_map(g, AnglePolicy.PRUNE_PREFERRED)
    assert len(angles) == 1
    ang = angles[0]
    assert ang.quality is AnchorQuality.PRUNE_PAIR
    assert ang.theta_deg == pytest.approx(90.0)
    assert ang.bifurcation == (10, 10)


def test_compute_angle_map_all_policy():
    g = _hand_graph()
    angles = compute_angle_map(g, AnglePolicy.ALL)
    assert len(angles) == 3
    thetas = sorted(round(a.theta_deg, 4) for a in angles)
    # east-south 90, east-NW 135, south-NW 135
    assert thetas == [90.0, 135.0, 135.0]


def test_compute_angle_map_fallback_without_prune_pair():
    nodes = [
        KeyPoint(index=0, position=(10, 10), node_type=NodeType.BIFURCATION,
                 step=0, parent_index=None),
        KeyPoint(index=1, position=(14, 10), node_type=NodeType.ENDPOINT,
                 step=4, parent_index=0),
        KeyPoint(index=2, position=(10, 16), node_type=NodeType.ENDPOINT,
                 step=6, parent_index=0),
        KeyPoint(index=3, position=(4, 10), node_type=NodeType.ENDPOINT,
                 step=6, parent_index=0),
    ]
    nodes[0].children_indices.extend([1, 2, 3])
    g = VesselGraph(nodes=nodes, source_dims=(20, 20))
    angles = compute_angle_map(g, AnglePolicy.PRUNE_PREFERRED)
    assert len(angles) == 1
    # ties on quality resolve to the larger minimum anchor distance: (2, 3)
    assert {angles[0].anchor_a, angles[0].anchor_c} == {(10, 16), (4, 10)}


def test_angles_from_detected_y():
    mask, junction = thin_y_skeleton(90, arm=20)
    tip = (junction[0], junction[1] - 20)
    g = detect_keypoints(mask, tip, WalkerParams(prune_step=10))
    angles = compute_angle_map(g)
    assert angles, "a Y junction must produce at least one angle"
    best = min(angles, key=lambda a: abs(a.theta_deg - 90.0))
    assert abs(best.theta_deg - 90.0) <= 8.0


def test_render_overlay_shapes_and_bounds():
    mask, junction = thin_y_skeleton(80, arm=20)
    tip = (junction[0], junction[1] - 20)
    g = detect_keypoints(mask, tip, WalkerParams(prune_step=10))
    angles = compute_angle_map(g)
    out = render_angle_overlay(mask, angles)
    assert out.ndim == 3 and out.shape[2] == 3
    assert out.shape[:2] == mask.shape
    assert (out != 0).any()
    bad = BranchAngle(bifurcation=(500, 500), anchor_a=(501, 500),
                      anchor_c=(500, 501), theta_deg=90.0)
    with pytest.raises(ValueError):
        render_angle_overlay(mask, [bad])
