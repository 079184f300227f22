"""Skeleton traversal and attributed keypoint extraction.

A breadth-first set of 3x3 sliding-window walkers starts from a seed pixel,
erases each visited pixel from a working copy of the skeleton, and records an
attributed keypoint graph: the root, bifurcations (branch splits), endpoints
(dead ends) and prune nodes (periodic anchors dropped every ``prune_step``
pixels along a branch, used downstream as angle-vector tails).

The result is a forest: every non-root node has exactly one parent, links are
mutually consistent, and ``step`` is the pixel path distance to the parent
keypoint.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .raster import BinaryMask
from .skeleton import EIGHT_CONN


class NodeType(str, enum.Enum):
    ROOT = "root"
    BIFURCATION = "bifurcation"
    ENDPOINT = "endpoint"
    PRUNE = "prune"


@dataclass
class KeyPoint:
    index: int
    position: tuple[int, int]            # (x, y)
    node_type: NodeType
    step: int                            # path pixels to parent keypoint; 0 for root
    parent_position: tuple[int, int] | None = None
    parent_index: int | None = None
    children_positions: list[tuple[int, int]] = field(default_factory=list)
    children_indices: list[int] = field(default_factory=list)


@dataclass
class VesselGraph:
    nodes: list[KeyPoint]
    source_dims: tuple[int, int]         # (width, height)

    def bifurcations(self) -> list[KeyPoint]:
        # A root with 3+ outgoing branches sits on a junction itself (the
        # walk started there, so no bifurcation node was recorded for it).
        return [n for n in self.nodes
                if n.node_type is NodeType.BIFURCATION
                or (n.node_type is NodeType.ROOT and len(n.children_indices) >= 3)]

    def to_dict(self) -> dict:
        return {
            "width": self.source_dims[0],
            "height": self.source_dims[1],
            "nodes": [
                {
                    "index": n.index,
                    "x": n.position[0],
                    "y": n.position[1],
                    "type": n.node_type.value,
                    "step": n.step,
                    "parent": list(n.parent_position) if n.parent_position else None,
                    "parent_index": n.parent_index,
                    "child": [list(p) for p in n.children_positions],
                    "child_index": list(n.children_indices),
                }
                for n in self.nodes
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "VesselGraph":
        nodes = [
            KeyPoint(
                index=d["index"],
                position=(d["x"], d["y"]),
                node_type=NodeType(d["type"]),
                step=d["step"],
                parent_position=tuple(d["parent"]) if d.get("parent") else None,
                parent_index=d.get("parent_index"),
                children_positions=[tuple(p) for p in d.get("child", [])],
                children_indices=list(d.get("child_index", [])),
            )
            for d in doc["nodes"]
        ]
        return cls(nodes=nodes, source_dims=(doc["width"], doc["height"]))


class Predicate(str, enum.Enum):
    #: neighbor-count rule N > T on the 3x3 window of the working copy
    PAPER_COUNT = "paper_count"
    #: >= 2 connected components of unvisited neighbors (robust to erasure)
    BRANCH_COMPONENTS = "branch_components"


@dataclass
class WalkerParams:
    neighbor_threshold: int = 3
    prune_step: int = 10
    predicate: Predicate = Predicate.BRANCH_COMPONENTS
    rng_seed: int | None = None

    def __post_init__(self):
        self.predicate = Predicate(self.predicate)
        if self.neighbor_threshold < 1:
            raise ValueError("neighbor_threshold must be >= 1")
        if self.prune_step < 2:
            raise ValueError("prune_step must be >= 2")


# 8-neighborhood offsets, clockwise starting at north; fixes branch ordering
# and therefore makes detection byte-deterministic.
CLOCKWISE_FROM_NORTH = (
    (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1),
)

# Continuation preference within a branch component: orthogonal moves first.
# Taking a diagonal shortcut at a staircase double strands the skipped pixel,
# which would then masquerade as a one-pixel branch.
ORTHO_FIRST = (
    (0, -1), (1, 0), (0, 1), (-1, 0), (1, -1), (1, 1), (-1, 1), (-1, -1),
)


def pick_initial(mask: BinaryMask, params: WalkerParams | None = None) -> tuple[int, int]:
    """Select a foreground seed pixel.

    With no RNG seed, returns the first foreground pixel in row-major order;
    with a seed, a reproducible uniform choice.
    """
    mask = np.asarray(mask, dtype=bool)
    flat = np.flatnonzero(mask)
    if flat.size == 0:
        raise ValueError("cannot pick an initial point on an empty mask")
    seed = params.rng_seed if params is not None else None
    if seed is None:
        idx = int(flat[0])
    else:
        idx = int(np.random.default_rng(seed).choice(flat))
    y, x = divmod(idx, mask.shape[1])
    return (x, y)


def neighbor_count(mask: BinaryMask, p: tuple[int, int]) -> int:
    """3x3 window sum at ``p`` including the center; out-of-bounds cells are 0."""
    mask = np.asarray(mask, dtype=bool)
    x, y = p
    h, w = mask.shape
    if not (0 <= x < w and 0 <= y < h):
        raise ValueError(f"point {p} out of bounds for {w}x{h} mask")
    win = mask[max(y - 1, 0):y + 2, max(x - 1, 0):x + 2]
    return int(win.sum())


def _branch_components(work: np.ndarray, x: int, y: int) -> list[tuple[int, int]]:
    """Representatives of the 8-connected components of unvisited neighbors.

    One representative per component, the first in clockwise-from-north order;
    components are returned in that same order.
    """
    h, w = work.shape
    cells = []
    for dx, dy in CLOCKWISE_FROM_NORTH:
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and work[ny, nx]:
            cells.append((nx, ny))
    if not cells:
        return []
    # Union-find over at most 8 cells.
    parent = list(range(len(cells)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if max(abs(cells[i][0] - cells[j][0]), abs(cells[i][1] - cells[j][1])) <= 1:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    rank = {(x + dx, y + dy): i for i, (dx, dy) in enumerate(ORTHO_FIRST)}
    groups: dict[int, list[tuple[int, int]]] = {}
    order: list[int] = []
    for i, cell in enumerate(cells):
        r = find(i)
        if r not in groups:
            groups[r] = []
            order.append(r)
        groups[r].append(cell)
    # Components keep clockwise-from-north order; the representative within a
    # component is the orthogonally-reachable pixel when one exists.
    return [min(groups[r], key=rank.__getitem__) for r in order]


@dataclass
class _Walker:
    pos: tuple[int, int]       # next pixel to process
    parent_kp: int             # index of the keypoint this walker descends from
    prev: tuple[int, int]      # last pixel this walker actually processed
    steps: int = 0             # path pixels walked since that keypoint


def detect_keypoints(mask: BinaryMask, start: tuple[int, int],
                     params: WalkerParams | None = None,
                     visit_counts: np.ndarray | None = None) -> VesselGraph:
    """Walk the skeleton component containing ``start`` and emit its keypoint graph.

    Every foreground pixel 8-connected to ``start`` is visited exactly once;
    visited pixels are erased from a private working copy. When an int array
    of the mask's shape is passed as ``visit_counts`` it is incremented at
    every processed pixel, exposing the coverage guarantee to callers.
    """
    params = params or WalkerParams()
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    sx, sy = start
    if not (0 <= sx < w and 0 <= sy < h) or not mask[sy, sx]:
        raise ValueError(f"start {start} is not a foreground pixel")

    work = mask.copy()
    nodes: list[KeyPoint] = []

    def add_node(pos, node_type, step, parent_idx) -> int:
        idx = len(nodes)
        parent_pos = nodes[parent_idx].position if parent_idx is not None else None
        nodes.append(KeyPoint(index=idx, position=pos, node_type=node_type,
                              step=step, parent_position=parent_pos,
                              parent_index=parent_idx))
        if parent_idx is not None:
            nodes[parent_idx].children_positions.append(pos)
            nodes[parent_idx].children_indices.append(idx)
        return idx

    root_idx = add_node((sx, sy), NodeType.ROOT, 0, None)
    work[sy, sx] = False
    if visit_counts is not None:
        visit_counts[sy, sx] += 1
    queue: deque[_Walker] = deque(
        _Walker(pos=rep, parent_kp=root_idx, prev=(sx, sy))
        for rep in _branch_components(work, sx, sy)
    )

    # Restricted to the start's 8-connected component so coverage re-seeding
    # never leaks into other vessels.
    labels, _ = ndimage.label(mask, structure=EIGHT_CONN)
    component = labels == labels[sy, sx]

    while True:
        while queue:
            wk = queue.popleft()
            x, y = wk.pos
            if not work[y, x]:
                # Consumed by a sibling walker (loop closure). Close the
                # branch at its last real pixel so no walked pixel goes
                # unaccounted for.
                if wk.steps > 0:
                    add_node(wk.prev, NodeType.ENDPOINT, wk.steps, wk.parent_kp)
                continue
            n_count = neighbor_count(work, (x, y))
            work[y, x] = False
            if visit_counts is not None:
                visit_counts[y, x] += 1
            wk.steps += 1
            reps = _branch_components(work, x, y)

            if params.predicate is Predicate.PAPER_COUNT:
                is_bif = n_count > params.neighbor_threshold and reps
            else:
                is_bif = len(reps) >= 2

            if is_bif:
                bif_idx = add_node((x, y), NodeType.BIFURCATION, wk.steps, wk.parent_kp)
                for rep in reps:
                    queue.append(_Walker(pos=rep, parent_kp=bif_idx, prev=(x, y)))
            elif not reps:
                add_node((x, y), NodeType.ENDPOINT, wk.steps, wk.parent_kp)
            else:
                if wk.steps >= params.prune_step:
                    prune_idx = add_node((x, y), NodeType.PRUNE, wk.steps, wk.parent_kp)
                    wk.parent_kp = prune_idx
                    wk.steps = 0
                wk.pos = reps[0]
                wk.prev = (x, y)
                queue.append(wk)

        # Erasure can disconnect crossings and loops from their own component;
        # re-seed next to an already-visited pixel so coverage stays exact.
        remaining = component & work
        if not remaining.any():
            break
        seed = _reseed_point(remaining, component & ~work)
        parent = _nearest_keypoint(nodes, seed)
        queue.append(_Walker(pos=seed, parent_kp=parent,
                             prev=nodes[parent].position))

    graph = VesselGraph(nodes=nodes, source_dims=(w, h))
    graph = _merge_close_bifurcations(graph, min_separation=3)
    return _absorb_root_junction(graph, min_separation=3)


def _reseed_point(remaining: np.ndarray, visited: np.ndarray) -> tuple[int, int]:
    frontier = remaining & ndimage.binary_dilation(visited, structure=EIGHT_CONN)
    pool = frontier if frontier.any() else remaining
    y, x = np.unravel_index(int(np.flatnonzero(pool)[0]), pool.shape)
    return (int(x), int(y))


def _nearest_keypoint(nodes: list[KeyPoint], pos: tuple[int, int]) -> int:
    x, y = pos
    return min(nodes, key=lambda n: ((n.position[0] - x) ** 2 + (n.position[1] - y) ** 2,
                                     n.index)).index


def _merge_close_bifurcations(graph: VesselGraph, min_separation: int = 3) -> VesselGraph:
    """Collapse bifurcations closer than ``min_separation`` along the path.

    Thinned skeletons leave 2-pixel junction clusters that would otherwise be
    double-counted; the first bifurcation wins and inherits the children.
    """
    nodes = graph.nodes
    merged_into: dict[int, int] = {}

    def resolve(idx: int) -> int:
        while idx in merged_into:
            idx = merged_into[idx]
        return idx

    extra_step: dict[int, int] = {}
    for n in nodes:
        if n.node_type is not NodeType.BIFURCATION or n.parent_index is None:
            continue
        parent = nodes[resolve(n.parent_index)]
        if parent.node_type is NodeType.BIFURCATION and n.step + extra_step.get(n.index, 0) < min_separation:
            merged_into[n.index] = parent.index
            for ci in n.children_indices:
                extra_step[ci] = extra_step.get(ci, 0) + n.step

    if not merged_into:
        return graph

    keep = [n for n in nodes if n.index not in merged_into]
    remap = {n.index: i for i, n in enumerate(keep)}
    new_nodes: list[KeyPoint] = []
    for n in keep:
        parent_idx = resolve(n.parent_index) if n.parent_index is not None else None
        new_nodes.append(KeyPoint(
            index=remap[n.index],
            position=n.position,
            node_type=n.node_type,
            step=n.step + extra_step.get(n.index, 0),
            parent_position=nodes[parent_idx].position if parent_idx is not None else None,
            parent_index=remap[parent_idx] if parent_idx is not None else None,
        ))
    for n in new_nodes:
        if n.parent_index is not None:
            new_nodes[n.parent_index].children_positions.append(n.position)
            new_nodes[n.parent_index].children_indices.append(n.index)
    return VesselGraph(nodes=new_nodes, source_dims=graph.source_dims)


def _absorb_root_junction(graph: VesselGraph, min_separation: int = 3) -> VesselGraph:
    """Reunite a junction that the root split.

    Starting the walk right next to a junction attributes some of its branches
    to the root instead of the bifurcation node. When the root sits within
    ``min_separation`` path pixels of a child bifurcation, its other branches
    are re-attached to that bifurcation so the junction is whole again.
    """
    root = graph.nodes[0]
    if root.node_type is not NodeType.ROOT or len(root.children_indices) < 2:
        return graph
    bif_children = [graph.nodes[ci] for ci in root.children_indices
                    if graph.nodes[ci].node_type is NodeType.BIFURCATION
                    and graph.nodes[ci].step < min_separation]
    if not bif_children:
        return graph
    bif = bif_children[0]
    for ci in list(root.children_indices):
        if ci == bif.index:
            continue
        child = graph.nodes[ci]
        child.parent_index = bif.index
        child.parent_position = bif.position
        child.step += bif.step
        bif.children_indices.append(ci)
        bif.children_positions.append(child.position)
    root.children_indices = [bif.index]
    root.children_positions = [bif.position]
    return graph


def branch_census(graph: VesselGraph) -> dict[NodeType, int]:
    """Exact node counts per type; values sum to the node total."""
    counts = {t: 0 for t in NodeType}
    for n in graph.nodes:
        counts[n.node_type] += 1
    return counts
