"""Branching-angle computation at bifurcations.

The angle at a bifurcation is measured between the vectors from the junction
to one anchor on each outgoing branch. Anchors are the first downstream
keypoints; prune-node anchors sit a fixed path distance out on each branch,
which makes them far more reliable direction estimates than raw neighboring
pixels or distant endpoints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from PIL import Image, ImageDraw

from .keypoints import KeyPoint, NodeType, VesselGraph
from .raster import BinaryMask, ColorImage


class AnchorQuality(str, enum.Enum):
    PRUNE_PAIR = "prune_pair"
    MIXED = "mixed"
    ENDPOINT_PAIR = "endpoint_pair"


@dataclass
class BranchAngle:
    bifurcation: tuple[int, int]
    anchor_a: tuple[int, int]
    anchor_c: tuple[int, int]
    theta_deg: float
    anchor_types: tuple[NodeType, NodeType] = (NodeType.PRUNE, NodeType.PRUNE)
    quality: AnchorQuality = AnchorQuality.PRUNE_PAIR

    def __post_init__(self):
        if self.anchor_a == self.bifurcation or self.anchor_c == self.bifurcation:
            raise ValueError("anchor coincides with the bifurcation point")
        expected = vector_angle(self.bifurcation, self.anchor_a, self.anchor_c)
        if abs(expected - self.theta_deg) > 1e-9:
            raise ValueError(
                f"stored angle {self.theta_deg} inconsistent with points "
                f"(recomputes to {expected})")


def vector_angle(p, a, c) -> float:
    """Angle in degrees at vertex ``p`` between rays p->a and p->c.

    The normalized dot product is clamped to [-1, 1] so collinear inputs
    cannot fault on rounding.
    """
    v1 = (a[0] - p[0], a[1] - p[1])
    v2 = (c[0] - p[0], c[1] - p[1])
    n1 = math.hypot(*v1)
    n2 = math.hypot(*v2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("zero-length direction vector at the vertex")
    # Normalize each vector separately; the product n1 * n2 can underflow.
    cos = (v1[0] / n1) * (v2[0] / n2) + (v1[1] / n1) * (v2[1] / n2)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


def _pair_quality(t1: NodeType, t2: NodeType) -> AnchorQuality:
    if t1 is NodeType.PRUNE and t2 is NodeType.PRUNE:
        return AnchorQuality.PRUNE_PAIR
    if t1 is NodeType.ENDPOINT and t2 is NodeType.ENDPOINT:
        return AnchorQuality.ENDPOINT_PAIR
    return AnchorQuality.MIXED


def select_anchors(graph: VesselGraph, bif_index: int
                   ) -> list[tuple[KeyPoint, KeyPoint, AnchorQuality]]:
    """Anchor pairs for one bifurcation, one per unordered branch pair.

    The anchor on each branch is that branch's first downstream keypoint
    (prune, bifurcation or endpoint — whichever came first).
    """
    node = graph.nodes[bif_index]
    is_root_junction = (node.node_type is NodeType.ROOT
                        and len(node.children_indices) >= 3)
    if node.node_type is not NodeType.BIFURCATION and not is_root_junction:
        raise ValueError(f"node {bif_index} is {node.node_type.value}, not a bifurcation")
    anchors = [graph.nodes[ci] for ci in node.children_indices]
    return [(a, c, _pair_quality(a.node_type, c.node_type))
            for a, c in combinations(anchors, 2)]


class AnglePolicy(str, enum.Enum):
    PRUNE_PREFERRED = "prune_preferred"
    ALL = "all"


_QUALITY_RANK = {AnchorQuality.PRUNE_PAIR: 0, AnchorQuality.MIXED: 1,
                 AnchorQuality.ENDPOINT_PAIR: 2}


def compute_angle_map(graph: VesselGraph,
                      policy: AnglePolicy = AnglePolicy.PRUNE_PREFERRED
                      ) -> list[BranchAngle]:
    """All branching angles of a graph, ordered by bifurcation index.

    Under ``prune_preferred`` each bifurcation contributes its prune-anchored
    pairs only, falling back to the single best remaining pair (mixed over
    endpoint-endpoint, ties to the larger minimum anchor distance).
    """
    policy = AnglePolicy(policy)
    out: list[BranchAngle] = []
    for node in graph.bifurcations():
        pairs = [p for p in select_anchors(graph, node.index)
                 if p[0].position != node.position and p[1].position != node.position]
        if not pairs:
            continue
        if policy is AnglePolicy.PRUNE_PREFERRED:
            prune_pairs = [p for p in pairs if p[2] is AnchorQuality.PRUNE_PAIR]
            if prune_pairs:
                chosen = prune_pairs
            else:
                chosen = [min(pairs, key=lambda p: (_QUALITY_RANK[p[2]],
                                                    -min(p[0].step, p[1].step)))]
        else:
            chosen = pairs
        for a, c, quality in chosen:
            theta = vector_angle(node.position, a.position, c.position)
            out.append(BranchAngle(bifurcation=node.position,
                                   anchor_a=a.position, anchor_c=c.position,
                                   theta_deg=theta,
                                   anchor_types=(a.node_type, c.node_type),
                                   quality=quality))
    return out


def render_angle_overlay(img: ColorImage | BinaryMask,
                         angles: list[BranchAngle]) -> ColorImage:
    """Draw anchor segments and angle labels over a copy of the input."""
    arr = np.asarray(img)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    h, w = arr.shape[:2]
    for ang in angles:
        for px, py in (ang.bifurcation, ang.anchor_a, ang.anchor_c):
            if not (0 <= px < w and 0 <= py < h):
                raise ValueError(f"angle coordinate ({px}, {py}) out of bounds")
    im = Image.fromarray(arr.astype(np.uint8))
    draw = ImageDraw.Draw(im)
    for ang in angles:
        draw.line([ang.bifurcation, ang.anchor_a], fill=(255, 64, 64), width=1)
        draw.line([ang.bifurcation, ang.anchor_c], fill=(64, 160, 255), width=1)
        bx, by = ang.bifurcation
        draw.ellipse([bx - 2, by - 2, bx + 2, by + 2], outline=(255, 255, 0))
        draw.text((bx + 4, by + 4), f"{ang.theta_deg:.2f}", fill=(255, 255, 0))
    return np.asarray(im)
