"""Three prior-art bifurcation/angle methods used as benchmark comparisons.

* Line-detection: Hough segments on the skeleton, intersections as junctions.
* ROI-window: neighborhood-sum junction scan plus a square window whose border
  crossings become the vector tails.
* Rule-based: high-degree skeleton pixels as junctions, least-squares branch
  tangents, acute-angle fold.

Each emits the same ``BranchAngle`` records as the main detector so the
benchmark treats all methods uniformly.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations

import cv2
import numpy as np
from scipy import ndimage

from .angles import BranchAngle, vector_angle
from .keypoints import CLOCKWISE_FROM_NORTH
from .raster import BinaryMask
from .skeleton import EIGHT_CONN, thin


def _make_angle(bif, a, c) -> BranchAngle | None:
    bif, a, c = tuple(map(int, bif)), tuple(map(int, a)), tuple(map(int, c))
    if a == bif or c == bif:
        return None
    return BranchAngle(bifurcation=bif, anchor_a=a, anchor_c=c,
                       theta_deg=vector_angle(bif, a, c))


# --------------------------------------------------------------------------
# Line-detection method
# --------------------------------------------------------------------------

def _segment_intersection(s1, s2, tol: float = 2.0):
    """Intersection point of two segments, allowing ``tol`` px of overshoot."""
    p = np.array(s1[:2], dtype=float)
    r = np.array(s1[2:], dtype=float) - p
    q = np.array(s2[:2], dtype=float)
    s = np.array(s2[2:], dtype=float) - q
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-12:
        return None
    t = ((q - p)[0] * s[1] - (q - p)[1] * s[0]) / denom
    u = ((q - p)[0] * r[1] - (q - p)[1] * r[0]) / denom
    tol_t = tol / max(np.hypot(*r), 1e-9)
    tol_u = tol / max(np.hypot(*s), 1e-9)
    if -tol_t <= t <= 1 + tol_t and -tol_u <= u <= 1 + tol_u:
        return p + t * r
    return None


def line_detection_method(mask: BinaryMask, min_line_length: int = 20,
                          vote_threshold: int = 15, max_gap: int = 3
                          ) -> list[BranchAngle]:
    """Hough segment intersections as bifurcations (1 deg / 1 px voting bins).

    Every reported intersection lies within 2 px of mask foreground; angles are
    measured between the segment directions pointing away from the crossing.
    """
    mask = np.asarray(mask, dtype=bool)
    skel = thin(mask)
    img = skel.astype(np.uint8) * 255
    lines = cv2.HoughLinesP(img, rho=1, theta=np.pi / 180.0,
                            threshold=vote_threshold,
                            minLineLength=min_line_length, maxLineGap=max_gap)
    if lines is None:
        return []
    segs = [tuple(int(v) for v in np.ravel(ln)) for ln in lines]
    # Distance to the nearest foreground pixel, for the containment check.
    dist = ndimage.distance_transform_edt(~mask)
    h, w = mask.shape
    out: list[BranchAngle] = []
    seen: set[tuple[int, int]] = set()
    for s1, s2 in combinations(segs, 2):
        inter = _segment_intersection(s1, s2)
        if inter is None:
            continue
        ix, iy = int(round(inter[0])), int(round(inter[1]))
        if not (0 <= ix < w and 0 <= iy < h) or dist[iy, ix] > 2.0:
            continue
        if (ix, iy) in seen:
            continue
        seen.add((ix, iy))
        a = _farther_endpoint(s1, inter)
        c = _farther_endpoint(s2, inter)
        ang = _make_angle((ix, iy), a, c)
        if ang is not None:
            out.append(ang)
    return out


def _farther_endpoint(seg, point):
    e1, e2 = np.array(seg[:2], float), np.array(seg[2:], float)
    return e1 if np.linalg.norm(e1 - point) >= np.linalg.norm(e2 - point) else e2


# --------------------------------------------------------------------------
# ROI-window method
# --------------------------------------------------------------------------

def _geodesic_distance(skel: np.ndarray, root: tuple[int, int]) -> np.ndarray:
    h, w = skel.shape
    dist = np.full((h, w), -1, dtype=np.int64)
    rx, ry = root
    dist[ry, rx] = 0
    q = deque([(rx, ry)])
    while q:
        x, y = q.popleft()
        for dx, dy in CLOCKWISE_FROM_NORTH:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and skel[ny, nx] and dist[ny, nx] < 0:
                dist[ny, nx] = dist[y, x] + 1
                q.append((nx, ny))
    return dist


def _cluster_candidates(cand: np.ndarray) -> list[tuple[int, int]]:
    labels, n = ndimage.label(cand, structure=EIGHT_CONN)
    reps = []
    for i in range(1, n + 1):
        ys, xs = np.nonzero(labels == i)
        cx, cy = xs.mean(), ys.mean()
        j = int(np.argmin((xs - cx) ** 2 + (ys - cy) ** 2))
        reps.append((int(xs[j]), int(ys[j])))
    return reps


def roi_window_method(mask: BinaryMask, root: tuple[int, int],
                      neighbor_thresh: int = 5, roi: int = 50
                      ) -> list[BranchAngle]:
    """Neighborhood-sum junction scan with window-exit vector tails.

    Pixels whose 3x3 sum (center included) reaches ``neighbor_thresh`` on the
    thinned skeleton are junction candidates; adjacent candidates collapse to
    one bifurcation. Vector tails are where each outgoing branch leaves the
    roi x roi window (or the branch endpoint when it ends inside). The branch
    carrying the shortest path back to the root is the incoming one.
    """
    mask = np.asarray(mask, dtype=bool)
    skel = thin(mask)
    rx, ry = root
    h, w = skel.shape
    if not (0 <= rx < w and 0 <= ry < h) or not mask[ry, rx]:
        raise ValueError(f"root {root} is not a foreground pixel")
    if not skel[ry, rx]:
        ys, xs = np.nonzero(skel)
        if xs.size == 0:
            return []
        j = int(np.argmin((xs - rx) ** 2 + (ys - ry) ** 2))
        rx, ry = int(xs[j]), int(ys[j])

    sums = ndimage.uniform_filter(skel.astype(np.float64), size=3,
                                  mode="constant") * 9.0
    cand = skel & (np.round(sums).astype(int) >= neighbor_thresh)
    dist = _geodesic_distance(skel, (rx, ry))
    cand &= dist >= 0  # trace only what is reachable from the root
    half = roi // 2
    out: list[BranchAngle] = []
    for bx, by in _cluster_candidates(cand):
        y0, y1 = max(by - half, 0), min(by + half + 1, h)
        x0, x1 = max(bx - half, 0), min(bx + half + 1, w)
        window = skel[y0:y1, x0:x1].copy()
        # Remove the junction core so branches separate.
        wy, wx = by - y0, bx - x0
        window[max(wy - 1, 0):wy + 2, max(wx - 1, 0):wx + 2] = False
        labels, n = ndimage.label(window, structure=EIGHT_CONN)
        tails, incoming_dist = [], []
        for i in range(1, n + 1):
            ys, xs = np.nonzero(labels == i)
            # Keep only branches attached to the junction.
            d2 = (xs - wx) ** 2 + (ys - wy) ** 2
            if d2.min() > 8:
                continue
            on_border = (ys == 0) | (ys == window.shape[0] - 1) | \
                        (xs == 0) | (xs == window.shape[1] - 1)
            if on_border.any():
                j = int(np.flatnonzero(on_border)[0])
            else:
                j = int(np.argmax(d2))  # branch ends inside: tail = endpoint
            tx, ty = int(xs[j]) + x0, int(ys[j]) + y0
            tails.append((tx, ty))
            branch_d = dist[ys + y0, xs + x0]
            valid = branch_d[branch_d >= 0]
            incoming_dist.append(int(valid.min()) if valid.size else np.iinfo(np.int64).max)
        if len(tails) < 3:
            continue
        incoming = int(np.argmin(incoming_dist))
        outgoing = [t for i, t in enumerate(tails) if i != incoming]
        for a, c in combinations(outgoing, 2):
            ang = _make_angle((bx, by), a, c)
            if ang is not None:
                out.append(ang)
    return out


# --------------------------------------------------------------------------
# Rule-based method
# --------------------------------------------------------------------------

def _trace_branch(skel: np.ndarray, start: tuple[int, int],
                  blocked: set[tuple[int, int]], length: int) -> list[tuple[int, int]]:
    path = [start]
    visited = set(blocked) | {start}
    cur = start
    h, w = skel.shape
    while len(path) < length:
        nxt = None
        for dx, dy in CLOCKWISE_FROM_NORTH:
            nx, ny = cur[0] + dx, cur[1] + dy
            if 0 <= nx < w and 0 <= ny < h and skel[ny, nx] and (nx, ny) not in visited:
                nxt = (nx, ny)
                break
        if nxt is None:
            break
        path.append(nxt)
        visited.add(nxt)
        cur = nxt
    return path


def _tangent_direction(bif: tuple[int, int], path: list[tuple[int, int]]) -> np.ndarray:
    offs = np.array([(x - bif[0], y - bif[1]) for x, y in path], dtype=float)
    mean = offs.mean(axis=0)
    if len(offs) < 2:
        d = offs[0]
    else:
        # Principal direction of the branch pixels, signed away from the junction.
        _, _, vt = np.linalg.svd(offs - mean, full_matrices=False)
        d = vt[0]
        if np.dot(d, mean) < 0:
            d = -d
    n = np.linalg.norm(d)
    return d / n if n > 0 else np.array([1.0, 0.0])


def rule_based_method(mask: BinaryMask, tangent_window: int = 7,
                      anchor_length: int = 12) -> list[BranchAngle]:
    """High-degree pixels as junctions, tangent-based angles folded acute.

    A skeleton pixel with more than 3 foreground neighbors (center excluded)
    is a bifurcation; adjacent ones merge. Branch tangents come from a
    least-squares fit over each branch's first ``tangent_window`` pixels, and
    angles above 90 degrees fold to their supplement.
    """
    mask = np.asarray(mask, dtype=bool)
    skel = thin(mask)
    sums = ndimage.uniform_filter(skel.astype(np.float64), size=3,
                                  mode="constant") * 9.0
    neighbors = np.round(sums).astype(int) - 1  # center excluded
    cand = skel & (neighbors > 3)
    out: list[BranchAngle] = []
    h, w = skel.shape
    for bx, by in _cluster_candidates(cand):
        blocked = {(bx + dx, by + dy) for dx, dy in CLOCKWISE_FROM_NORTH
                   if (bx + dx, by + dy) != (bx, by)} | {(bx, by)}
        starts = [p for p in sorted(blocked - {(bx, by)})
                  if 0 <= p[0] < w and 0 <= p[1] < h and skel[p[1], p[0]]]
        # Adjacent start pixels belong to one branch when at least one of the
        # pair is a diagonal neighbor of the junction (staircase doubles);
        # two orthogonal neighbors, as at a perfect crossing, are distinct
        # branches even though they touch corner-to-corner.
        def _diagonal(p):
            return abs(p[0] - bx) == 1 and abs(p[1] - by) == 1

        groups: list[list[tuple[int, int]]] = []
        for sp in starts:
            for grp in groups:
                if any(max(abs(sp[0] - q[0]), abs(sp[1] - q[1])) <= 1
                       and (_diagonal(sp) or _diagonal(q)) for q in grp):
                    grp.append(sp)
                    break
            else:
                groups.append([sp])
        dirs = [_tangent_direction((bx, by), _trace_branch(skel, grp[0], blocked,
                                                           tangent_window))
                for grp in groups]
        for d1, d2 in combinations(dirs, 2):
            # Near-collinear directions are one vessel passing through, not a
            # branch pair.
            if float(np.dot(d1, d2)) < -0.985:
                continue
            a = (bx + int(round(d1[0] * anchor_length)),
                 by + int(round(d1[1] * anchor_length)))
            c = (bx + int(round(d2[0] * anchor_length)),
                 by + int(round(d2[1] * anchor_length)))
            ang = _make_angle((bx, by), a, c)
            if ang is None:
                continue
            if ang.theta_deg > 90.0:
                # Reflect one anchor through the junction: exact supplement.
                c2 = (2 * bx - ang.anchor_c[0], 2 * by - ang.anchor_c[1])
                ang = _make_angle((bx, by), ang.anchor_a, c2)
            if ang is not None:
                out.append(ang)
    return out
